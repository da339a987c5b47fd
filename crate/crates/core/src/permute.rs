//! Multi-segment targets, control tokens and permutation augmentation.
//!
//! A composed target is a concatenation of segments, each introduced by its
//! marker (`<lex>`, `<ali>`, `<tgt>`). In full mode every ordering of the
//! configured segments becomes its own example and the source is prefixed by a
//! control token spelling the order as digits, e.g. `<312>` for tgt, lex, ali.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::intermediate::SegmentSet;
use crate::corpus::Sentence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SegmentKind {
    Lex = 1,
    Ali = 2,
    Tgt = 3,
}

impl SegmentKind {
    pub const ALL: [SegmentKind; 3] = [SegmentKind::Lex, SegmentKind::Ali, SegmentKind::Tgt];

    pub fn digit(self) -> char {
        match self {
            SegmentKind::Lex => '1',
            SegmentKind::Ali => '2',
            SegmentKind::Tgt => '3',
        }
    }

    pub fn from_digit(c: char) -> Option<SegmentKind> {
        match c {
            '1' => Some(SegmentKind::Lex),
            '2' => Some(SegmentKind::Ali),
            '3' => Some(SegmentKind::Tgt),
            _ => None,
        }
    }

    pub fn marker(self) -> &'static str {
        match self {
            SegmentKind::Lex => "<lex>",
            SegmentKind::Ali => "<ali>",
            SegmentKind::Tgt => "<tgt>",
        }
    }

    pub fn from_marker(token: &str) -> Option<SegmentKind> {
        SegmentKind::ALL.into_iter().find(|k| k.marker() == token)
    }

    pub fn name(self) -> &'static str {
        match self {
            SegmentKind::Lex => "lex",
            SegmentKind::Ali => "ali",
            SegmentKind::Tgt => "tgt",
        }
    }

    fn of(self, segments: &SegmentSet) -> &Sentence {
        match self {
            SegmentKind::Lex => &segments.lex,
            SegmentKind::Ali => &segments.ali,
            SegmentKind::Tgt => &segments.tgt,
        }
    }
}

impl fmt::Display for SegmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SegmentKind {
    type Err = PermuteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SegmentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| PermuteError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PermuteError {
    DuplicateKind(SegmentKind),
    MissingKind(SegmentKind),
    /// The kind is not part of the configured subset.
    UnexpectedKind(SegmentKind),
    UnknownKind(String),
    /// A marker occurs more than once in a decoded output.
    AmbiguousMarker(SegmentKind),
}

impl fmt::Display for PermuteError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PermuteError::DuplicateKind(k) => write!(f, "segment {k} appears twice in the order"),
            PermuteError::MissingKind(k) => write!(f, "segment {k} is missing from the order"),
            PermuteError::UnexpectedKind(k) => write!(f, "segment {k} is not configured"),
            PermuteError::UnknownKind(s) => write!(f, "unknown segment kind {s:?}"),
            PermuteError::AmbiguousMarker(k) => {
                write!(f, "marker {} occurs more than once", k.marker())
            }
        }
    }
}

impl core::error::Error for PermuteError {}

fn check_distinct(order: &[SegmentKind]) -> Result<(), PermuteError> {
    for (i, k) in order.iter().enumerate() {
        if order[..i].contains(k) {
            return Err(PermuteError::DuplicateKind(*k));
        }
    }
    Ok(())
}

/// The configured set of segments; always contains `tgt`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SegmentSubset {
    kinds: Vec<SegmentKind>,
}

impl SegmentSubset {
    pub fn new(kinds: impl IntoIterator<Item = SegmentKind>) -> Result<Self, PermuteError> {
        let kinds: Vec<SegmentKind> = kinds.into_iter().collect();
        check_distinct(&kinds)?;
        if !kinds.contains(&SegmentKind::Tgt) {
            return Err(PermuteError::MissingKind(SegmentKind::Tgt));
        }
        let mut kinds = kinds;
        kinds.sort_unstable();
        Ok(SegmentSubset { kinds })
    }

    pub fn all() -> Self {
        SegmentSubset { kinds: SegmentKind::ALL.to_vec() }
    }

    /// Kinds in canonical (digit) order.
    pub fn kinds(&self) -> &[SegmentKind] {
        &self.kinds
    }

    pub fn contains(&self, kind: SegmentKind) -> bool {
        self.kinds.contains(&kind)
    }

    /// Errors unless `order` is a permutation of this subset.
    pub fn check_order(&self, order: &[SegmentKind]) -> Result<(), PermuteError> {
        check_distinct(order)?;
        if let Some(k) = order.iter().find(|k| !self.contains(**k)) {
            return Err(PermuteError::UnexpectedKind(*k));
        }
        if let Some(k) = self.kinds.iter().find(|k| !order.contains(k)) {
            return Err(PermuteError::MissingKind(*k));
        }
        Ok(())
    }

    /// All orderings, in lexicographic order of their digit strings.
    pub fn permutations(&self) -> Vec<Vec<SegmentKind>> {
        fn go(rest: &[SegmentKind], prefix: &mut Vec<SegmentKind>, out: &mut Vec<Vec<SegmentKind>>) {
            if rest.is_empty() {
                out.push(prefix.clone());
                return;
            }
            for i in 0..rest.len() {
                let mut remaining = rest.to_vec();
                let k = remaining.remove(i);
                prefix.push(k);
                go(&remaining, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        go(&self.kinds, &mut Vec::new(), &mut out);
        out
    }
}

impl FromStr for SegmentSubset {
    type Err = PermuteError;

    /// Comma-separated kind names, e.g. `lex,ali,tgt`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let kinds = s
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(SegmentKind::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        SegmentSubset::new(kinds)
    }
}

impl fmt::Display for SegmentSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.kinds.iter().map(|k| k.name()).collect();
        f.write_str(&names.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AugmentMode {
    /// One example per sentence in canonical order, no control token.
    Simple,
    /// Every ordering, each with its control token.
    Full,
}

impl FromStr for AugmentMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simple" => Ok(AugmentMode::Simple),
            "full" => Ok(AugmentMode::Full),
            other => Err(format!("unknown mode {other:?} (expected simple or full)")),
        }
    }
}

impl fmt::Display for AugmentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AugmentMode::Simple => "simple",
            AugmentMode::Full => "full",
        })
    }
}

/// Marker-delimited concatenation of the segments in `order`.
pub fn compose_target(segments: &SegmentSet, order: &[SegmentKind]) -> Result<Vec<String>, PermuteError> {
    check_distinct(order)?;
    if !order.contains(&SegmentKind::Tgt) {
        return Err(PermuteError::MissingKind(SegmentKind::Tgt));
    }
    let len = order.iter().map(|k| k.of(segments).len() + 1).sum();
    let mut out = Vec::with_capacity(len);
    for kind in order {
        out.push(kind.marker().to_string());
        out.extend(kind.of(segments).iter().cloned());
    }
    Ok(out)
}

/// `<` + digits of the kinds in order + `>`.
pub fn control_token(order: &[SegmentKind]) -> String {
    let mut s = String::with_capacity(order.len() + 2);
    s.push('<');
    s.extend(order.iter().map(|k| k.digit()));
    s.push('>');
    s
}

/// Inverse of [`control_token`]; `None` unless the token names distinct kinds.
pub fn parse_control_token(token: &str) -> Option<Vec<SegmentKind>> {
    let digits = token.strip_prefix('<')?.strip_suffix('>')?;
    let order: Vec<SegmentKind> = digits.chars().map(SegmentKind::from_digit).collect::<Option<_>>()?;
    (!order.is_empty() && check_distinct(&order).is_ok()).then_some(order)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedExample {
    /// Index of the originating sentence pair.
    pub sentence_id: usize,
    pub source: Vec<String>,
    pub target: Vec<String>,
    pub order: Vec<SegmentKind>,
    /// Token count of each segment, in `order`.
    pub segment_lengths: Vec<usize>,
}

impl AugmentedExample {
    pub fn control_token(&self) -> Option<&str> {
        self.source.first().map(String::as_str).filter(|t| parse_control_token(t).is_some())
    }

    pub fn order_digits(&self) -> String {
        self.order.iter().map(|k| k.digit()).collect()
    }
}

/// Expands each sentence into training examples: one canonical example in
/// simple mode, or k! control-token-prefixed permutations in full mode.
/// Output is sentence-major with permutations in digit order.
pub fn augment_corpus(
    corpus: &[SegmentSet],
    subset: &SegmentSubset,
    mode: AugmentMode,
) -> Vec<AugmentedExample> {
    let orders = match mode {
        AugmentMode::Simple => alloc::vec![subset.kinds().to_vec()],
        AugmentMode::Full => subset.permutations(),
    };
    let mut out = Vec::with_capacity(corpus.len() * orders.len());
    for (sentence_id, segments) in corpus.iter().enumerate() {
        for order in &orders {
            let mut source = Vec::with_capacity(segments.source.len() + 1);
            if mode == AugmentMode::Full {
                source.push(control_token(order));
            }
            source.extend(segments.source.iter().cloned());
            let target = compose_target(segments, order).expect("subset orders are valid");
            out.push(AugmentedExample {
                sentence_id,
                source,
                target,
                order: order.clone(),
                segment_lengths: order.iter().map(|k| k.of(segments).len()).collect(),
            });
        }
    }
    out
}

/// Result of looking for one segment in a decoded sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Extracted {
    /// The marker was found; the segment may still be empty.
    Present(Vec<String>),
    /// The marker does not occur.
    Missing,
}

impl Extracted {
    pub fn tokens(&self) -> &[String] {
        match self {
            Extracted::Present(t) => t,
            Extracted::Missing => &[],
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, Extracted::Missing)
    }
}

/// Tokens strictly between `kind`'s marker and the next marker (or the end).
pub fn extract_segment<S: AsRef<str>>(output: &[S], kind: SegmentKind) -> Result<Extracted, PermuteError> {
    let marker = kind.marker();
    let mut positions = output.iter().enumerate().filter(|(_, t)| t.as_ref() == marker).map(|(i, _)| i);
    let Some(start) = positions.next() else {
        return Ok(Extracted::Missing);
    };
    if positions.next().is_some() {
        return Err(PermuteError::AmbiguousMarker(kind));
    }
    let tokens = output[start + 1..]
        .iter()
        .map(AsRef::as_ref)
        .take_while(|t| SegmentKind::from_marker(t).is_none())
        .map(String::from)
        .collect();
    Ok(Extracted::Present(tokens))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use SegmentKind::*;

    fn set(lex: &str, ali: &str, tgt: &str) -> SegmentSet {
        SegmentSet {
            source: Sentence::parse("s0 s1").unwrap(),
            lex: Sentence::parse(lex).unwrap(),
            ali: Sentence::parse(ali).unwrap(),
            tgt: Sentence::parse(tgt).unwrap(),
        }
    }

    #[test]
    fn compose_canonical_and_reversed() {
        let s = set("x", "y", "z");
        assert_eq!(compose_target(&s, &[Lex, Ali, Tgt]).unwrap(), ["<lex>", "x", "<ali>", "y", "<tgt>", "z"]);
        assert_eq!(compose_target(&s, &[Tgt, Ali, Lex]).unwrap(), ["<tgt>", "z", "<ali>", "y", "<lex>", "x"]);
        assert_eq!(compose_target(&s, &[Ali, Ali, Tgt]), Err(PermuteError::DuplicateKind(Ali)));
        assert_eq!(compose_target(&s, &[Lex, Ali]), Err(PermuteError::MissingKind(Tgt)));
    }

    #[test]
    fn control_tokens() {
        assert_eq!(control_token(&[Lex, Ali, Tgt]), "<123>");
        assert_eq!(control_token(&[Tgt, Ali, Lex]), "<321>");
        assert_eq!(control_token(&[Lex, Tgt]), "<13>");
        assert_eq!(parse_control_token("<231>"), Some(vec![Ali, Tgt, Lex]));
        assert_eq!(parse_control_token("<11>"), None);
        assert_eq!(parse_control_token("<14>"), None);
        assert_eq!(parse_control_token("<>"), None);
    }

    #[test]
    fn control_tokens_never_collide_across_subsets() {
        let subsets = ["tgt", "lex,tgt", "ali,tgt", "lex,ali,tgt"];
        let mut seen = alloc::collections::BTreeSet::new();
        let mut n = 0;
        for s in subsets {
            for order in s.parse::<SegmentSubset>().unwrap().permutations() {
                assert!(seen.insert(control_token(&order)));
                n += 1;
            }
        }
        assert_eq!(n, 1 + 2 + 2 + 6);
    }

    #[test]
    fn full_mode_emits_all_orders() {
        let corpus = [set("x", "y", "z")];
        let ex = augment_corpus(&corpus, &SegmentSubset::all(), AugmentMode::Full);
        let tokens: Vec<_> = ex.iter().map(|e| e.control_token().unwrap()).collect();
        assert_eq!(tokens, ["<123>", "<132>", "<213>", "<231>", "<312>", "<321>"]);
        assert_eq!(ex[0].source, ["<123>", "s0", "s1"]);
    }

    #[test]
    fn simple_mode_has_no_control_token() {
        let corpus = [set("x", "y", "z")];
        let subset: SegmentSubset = "lex,tgt".parse().unwrap();
        let ex = augment_corpus(&corpus, &subset, AugmentMode::Simple);
        assert_eq!(ex.len(), 1);
        assert_eq!(ex[0].source, ["s0", "s1"]);
        assert_eq!(ex[0].target, ["<lex>", "x", "<tgt>", "z"]);
        assert_eq!(ex[0].control_token(), None);
        assert_eq!(ex[0].segment_lengths, [1, 1]);
    }

    #[test]
    fn extraction() {
        let out = ["<tgt>", "a", "b", "<lex>", "c"];
        assert_eq!(extract_segment(&out, Tgt).unwrap(), Extracted::Present(vec!["a".into(), "b".into()]));
        assert_eq!(extract_segment(&["<lex>", "c"], Tgt).unwrap(), Extracted::Missing);
        assert_eq!(extract_segment(&["<tgt>", "<lex>", "c"], Tgt).unwrap(), Extracted::Present(vec![]));
        assert_eq!(extract_segment(&["<tgt>", "a", "<tgt>"], Tgt), Err(PermuteError::AmbiguousMarker(Tgt)));
    }

    #[test]
    fn subset_parsing() {
        assert_eq!("lex,ali,tgt".parse::<SegmentSubset>().unwrap(), SegmentSubset::all());
        assert_eq!("lex,ali".parse::<SegmentSubset>(), Err(PermuteError::MissingKind(Tgt)));
        assert!("lex,foo,tgt".parse::<SegmentSubset>().is_err());
        let s: SegmentSubset = "tgt,lex".parse().unwrap();
        assert_eq!(s.kinds(), [Lex, Tgt]);
        assert_eq!(s.to_string(), "lex,tgt");
        assert!(s.check_order(&[Tgt, Lex]).is_ok());
        assert_eq!(s.check_order(&[Tgt]), Err(PermuteError::MissingKind(Lex)));
        assert_eq!(s.check_order(&[Tgt, Ali]), Err(PermuteError::UnexpectedKind(Ali)));
    }
}
