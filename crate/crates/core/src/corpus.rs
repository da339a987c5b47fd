//! Word-level sentences, parallel corpora and vocabularies.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Which half of a parallel corpus a sentence comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Source,
    Target,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Source => "source",
            Side::Target => "target",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusError {
    /// A token was empty, contained whitespace, or used the reserved angle brackets.
    InvalidToken { token: String, reason: &'static str },
    /// Same as `InvalidToken`, located in an input file.
    InvalidTokenAt { side: Side, line: usize, token: String, reason: &'static str },
    LineCountMismatch { source: usize, target: usize },
    /// `line` is 1-based.
    EmptyLine { side: Side, line: usize },
    /// `offset` is the byte offset of the first invalid UTF-8 sequence.
    Decode { side: Side, offset: usize },
    EmptySentence,
    EmptyCorpus,
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::InvalidToken { token, reason } => {
                write!(f, "invalid token {token:?}: {reason}")
            }
            CorpusError::InvalidTokenAt { side, line, token, reason } => {
                write!(f, "{side} line {line}: invalid token {token:?}: {reason}")
            }
            CorpusError::LineCountMismatch { source, target } => write!(
                f,
                "line count mismatch: source has {source} lines, target has {target} lines"
            ),
            CorpusError::EmptyLine { side, line } => write!(f, "{side} line {line} is empty"),
            CorpusError::Decode { side, offset } => {
                write!(f, "{side} text is not valid UTF-8 at byte offset {offset}")
            }
            CorpusError::EmptySentence => f.write_str("sentence pair has an empty side"),
            CorpusError::EmptyCorpus => f.write_str("corpus is empty"),
        }
    }
}

impl core::error::Error for CorpusError {}

/// Checks a single word token. Angle brackets are reserved for segment markers
/// and control tokens, so no corpus token may contain them.
pub fn validate_token(token: &str) -> Result<(), &'static str> {
    if token.is_empty() {
        Err("empty token")
    } else if token.chars().any(char::is_whitespace) {
        Err("token contains whitespace")
    } else if token.contains(['<', '>']) {
        Err("angle brackets are reserved for markers and control tokens")
    } else {
        Ok(())
    }
}

/// An ordered sequence of word (or subword) tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sentence {
    tokens: Vec<String>,
}

impl Sentence {
    pub fn new<I, S>(tokens: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        for token in &tokens {
            validate_token(token)
                .map_err(|reason| CorpusError::InvalidToken { token: token.clone(), reason })?;
        }
        Ok(Sentence { tokens })
    }

    /// Builds a sentence from tokens already known to be valid (derived from
    /// validated tokens by this crate).
    pub(crate) fn from_trusted(tokens: Vec<String>) -> Self {
        debug_assert!(tokens.iter().all(|t| !t.is_empty()));
        Sentence { tokens }
    }

    /// Splits a line on spaces. Runs of spaces collapse and surrounding
    /// whitespace is stripped.
    pub fn parse(line: &str) -> Result<Self, CorpusError> {
        Sentence::new(line.trim().split(' ').filter(|t| !t.is_empty()))
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, String> {
        self.tokens.iter()
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, token) in self.tokens.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(token)?;
        }
        Ok(())
    }
}

impl core::ops::Index<usize> for Sentence {
    type Output = String;

    fn index(&self, index: usize) -> &String {
        &self.tokens[index]
    }
}

impl<'a> IntoIterator for &'a Sentence {
    type Item = &'a String;
    type IntoIter = core::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.tokens.iter()
    }
}

/// Line-aligned source/target sentence pairs. Neither side of a pair is empty.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParallelCorpus {
    pairs: Vec<(Sentence, Sentence)>,
}

impl ParallelCorpus {
    pub fn new(pairs: Vec<(Sentence, Sentence)>) -> Result<Self, CorpusError> {
        if pairs.iter().any(|(s, t)| s.is_empty() || t.is_empty()) {
            return Err(CorpusError::EmptySentence);
        }
        Ok(ParallelCorpus { pairs })
    }

    /// Parses the raw bytes of a source file and a target file.
    pub fn parse(source: &[u8], target: &[u8]) -> Result<Self, CorpusError> {
        let source = parse_lines(source, Side::Source)?;
        let target = parse_lines(target, Side::Target)?;
        if source.len() != target.len() {
            return Err(CorpusError::LineCountMismatch {
                source: source.len(),
                target: target.len(),
            });
        }
        Ok(ParallelCorpus { pairs: source.into_iter().zip(target).collect() })
    }

    pub fn pairs(&self) -> &[(Sentence, Sentence)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn side(&self, side: Side) -> impl Iterator<Item = &Sentence> + '_ {
        self.pairs.iter().map(move |(s, t)| match side {
            Side::Source => s,
            Side::Target => t,
        })
    }

    /// Serializes one side in the line format accepted by [`ParallelCorpus::parse`].
    pub fn side_text(&self, side: Side) -> String {
        sentences_to_text(self.side(side))
    }
}

/// One sentence per line, LF-terminated.
pub fn sentences_to_text<'a, I>(sentences: I) -> String
where
    I: IntoIterator<Item = &'a Sentence>,
{
    let mut out = String::new();
    for sentence in sentences {
        out.push_str(&sentence.to_string());
        out.push('\n');
    }
    out
}

/// Splits text into lines. A final LF does not start another line and a
/// trailing CR is dropped.
pub fn text_lines(text: &str) -> impl Iterator<Item = &str> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    let empty = text.is_empty();
    body.split('\n')
        .filter(move |_| !empty)
        .map(|line| line.strip_suffix('\r').unwrap_or(line))
}

/// Decodes and parses one side of a corpus, rejecting empty lines.
pub fn parse_lines(bytes: &[u8], side: Side) -> Result<Vec<Sentence>, CorpusError> {
    parse_lines_impl(bytes, side, false)
}

/// Like [`parse_lines`], but empty lines become empty sentences (an `ali`
/// sequence is empty when every target word is NULL-aligned).
pub fn parse_lines_allow_empty(bytes: &[u8], side: Side) -> Result<Vec<Sentence>, CorpusError> {
    parse_lines_impl(bytes, side, true)
}

fn parse_lines_impl(bytes: &[u8], side: Side, allow_empty: bool) -> Result<Vec<Sentence>, CorpusError> {
    let text = core::str::from_utf8(bytes)
        .map_err(|e| CorpusError::Decode { side, offset: e.valid_up_to() })?;
    text_lines(text)
        .enumerate()
        .map(|(i, line)| {
            let line_no = i + 1;
            let sentence = Sentence::parse(line).map_err(|e| match e {
                CorpusError::InvalidToken { token, reason } => {
                    CorpusError::InvalidTokenAt { side, line: line_no, token, reason }
                }
                other => other,
            })?;
            if sentence.is_empty() && !allow_empty {
                return Err(CorpusError::EmptyLine { side, line: line_no });
            }
            Ok(sentence)
        })
        .collect()
}

/// Word frequencies for one side of a corpus (or any token stream).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    entries: BTreeMap<String, u64>,
}

impl Vocabulary {
    /// Counts every token of the given sentences.
    pub fn count<'a, I>(sentences: I) -> Self
    where
        I: IntoIterator<Item = &'a Sentence>,
    {
        let mut entries = BTreeMap::new();
        for sentence in sentences {
            for token in sentence {
                *entries.entry(token.clone()).or_insert(0) += 1;
            }
        }
        Vocabulary { entries }
    }

    /// Zero counts are dropped.
    pub fn from_counts<I, S>(counts: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut entries = BTreeMap::new();
        for (word, count) in counts {
            if count > 0 {
                *entries.entry(word.into()).or_insert(0) += count;
            }
        }
        Vocabulary { entries }
    }

    pub fn get(&self, word: &str) -> Option<u64> {
        self.entries.get(word).copied()
    }

    /// True when `word` occurs at least `threshold` times (and at least once).
    pub fn admits(&self, word: &str, threshold: u64) -> bool {
        self.get(word).is_some_and(|c| c >= threshold.max(1))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }

    /// Entries in lexicographic word order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.entries.iter().map(|(w, c)| (w.as_str(), *c))
    }

    pub fn retain_min_count(&mut self, min_count: u64) {
        self.entries.retain(|_, c| *c >= min_count);
    }

    /// Adds the counts of `other` into `self`.
    pub fn merge(&mut self, other: &Vocabulary) {
        for (word, count) in &other.entries {
            *self.entries.entry(word.clone()).or_insert(0) += count;
        }
    }
}

/// Vocabulary of one corpus side keeping words seen at least `min_count` times.
pub fn build_vocab(corpus: &ParallelCorpus, side: Side, min_count: u64) -> Vocabulary {
    let mut vocab = Vocabulary::count(corpus.side(side));
    vocab.retain_min_count(min_count.max(1));
    vocab
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn corpus(pairs: &[(&str, &str)]) -> ParallelCorpus {
        ParallelCorpus::new(
            pairs
                .iter()
                .map(|(s, t)| (Sentence::parse(s).unwrap(), Sentence::parse(t).unwrap()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn parse_single_pair() {
        let c = ParallelCorpus::parse(b"das haus\n", b"the house\n").unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.pairs()[0].0.tokens(), ["das", "haus"]);
        assert_eq!(c.pairs()[0].1.tokens(), ["the", "house"]);
    }

    #[test]
    fn line_count_mismatch_names_both_counts() {
        let err = ParallelCorpus::parse(b"a\nb\nc\n", b"x\ny\n").unwrap_err();
        assert_eq!(err, CorpusError::LineCountMismatch { source: 3, target: 2 });
        let msg = err.to_string();
        assert!(msg.contains('3') && msg.contains('2'));
    }

    #[test]
    fn empty_line_is_rejected_with_line_number() {
        let err = ParallelCorpus::parse(b"a\n\nc\n", b"x\ny\nz\n").unwrap_err();
        assert_eq!(err, CorpusError::EmptyLine { side: Side::Source, line: 2 });
        let err = ParallelCorpus::parse(b"a\nb\n", b"x\n   \n").unwrap_err();
        assert_eq!(err, CorpusError::EmptyLine { side: Side::Target, line: 2 });
    }

    #[test]
    fn decode_error_reports_offset() {
        let err = ParallelCorpus::parse(b"ab \xff cd\n", b"x\n").unwrap_err();
        assert_eq!(err, CorpusError::Decode { side: Side::Source, offset: 3 });
    }

    #[test]
    fn lenient_parse_keeps_empty_lines() {
        let lines = parse_lines_allow_empty(b"a\n\nb\n", Side::Target).unwrap();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].is_empty());
    }

    #[test]
    fn double_space_collapses() {
        let s = Sentence::parse("  a  b ").unwrap();
        assert_eq!(s.tokens(), ["a", "b"]);
    }

    #[test]
    fn crlf_and_missing_final_newline() {
        let c = ParallelCorpus::parse(b"a b\r\nc", b"x\r\ny\n").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.pairs()[1].0.tokens(), ["c"]);
    }

    #[test]
    fn reserved_and_whitespace_tokens_rejected() {
        assert!(Sentence::parse("a <tgt> b").is_err());
        assert!(Sentence::parse("a <123>").is_err());
        assert!(Sentence::new(["a\tb"]).is_err());
        assert!(Sentence::new([""]).is_err());
        let err = ParallelCorpus::parse(b"ok\nx<y\n", b"a\nb\n").unwrap_err();
        assert!(matches!(err, CorpusError::InvalidTokenAt { line: 2, side: Side::Source, .. }));
    }

    #[test]
    fn empty_side_rejected_in_constructor() {
        let err = ParallelCorpus::new(vec![(Sentence::default(), Sentence::parse("x").unwrap())]);
        assert_eq!(err.unwrap_err(), CorpusError::EmptySentence);
    }

    #[test]
    fn build_vocab_counts_and_threshold() {
        let c = corpus(&[("a a b", "x")]);
        let v = build_vocab(&c, Side::Source, 1);
        assert_eq!(v.iter().collect::<Vec<_>>(), [("a", 2), ("b", 1)]);
        let v = build_vocab(&c, Side::Source, 2);
        assert_eq!(v.iter().collect::<Vec<_>>(), [("a", 2)]);
        let v = build_vocab(&c, Side::Target, 1);
        assert_eq!(v.iter().collect::<Vec<_>>(), [("x", 1)]);
    }

    #[test]
    fn side_text_round_trips() {
        let c = corpus(&[("a b", "x"), ("c", "y z")]);
        let again =
            ParallelCorpus::parse(c.side_text(Side::Source).as_bytes(), c.side_text(Side::Target).as_bytes())
                .unwrap();
        assert_eq!(c, again);
    }
}
