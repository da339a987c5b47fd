//! Byte-pair encoding: greedy merge learning, merge application with an
//! optional vocabulary filter, and the inverse join.
//!
//! Words start as character sequences. The end of a word is implicit: no merge
//! ever crosses it, so a single-character word never contributes a pair.
//! Non-final pieces of a segmented word carry [`CONTINUATION_MARKER`].

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::corpus::{Sentence, Vocabulary};

/// Suffix of every non-final subword piece.
pub const CONTINUATION_MARKER: &str = "@@";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BpeError {
    DuplicateMerge { left: String, right: String },
    InvalidSymbol { symbol: String },
    /// The last token of a segmented sentence still carries the continuation marker.
    DanglingContinuation { token: String },
}

impl fmt::Display for BpeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BpeError::DuplicateMerge { left, right } => {
                write!(f, "merge ({left}, {right}) appears twice")
            }
            BpeError::InvalidSymbol { symbol } => write!(f, "invalid merge symbol {symbol:?}"),
            BpeError::DanglingContinuation { token } => {
                write!(f, "malformed segmentation: sentence ends with continuation token {token:?}")
            }
        }
    }
}

impl core::error::Error for BpeError {}

/// Ordered merge operations; rank 0 was learned first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MergeTable {
    merges: Vec<(String, String)>,
    ranks: BTreeMap<String, BTreeMap<String, usize>>,
}

impl MergeTable {
    pub fn new(merges: Vec<(String, String)>) -> Result<Self, BpeError> {
        let mut ranks: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
        for (rank, (left, right)) in merges.iter().enumerate() {
            for symbol in [left, right] {
                if symbol.is_empty() || symbol.chars().any(char::is_whitespace) {
                    return Err(BpeError::InvalidSymbol { symbol: symbol.clone() });
                }
            }
            let row = ranks.entry(left.clone()).or_default();
            if row.insert(right.clone(), rank).is_some() {
                return Err(BpeError::DuplicateMerge { left: left.clone(), right: right.clone() });
            }
        }
        Ok(MergeTable { merges, ranks })
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn len(&self) -> usize {
        self.merges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.merges.is_empty()
    }

    pub fn rank(&self, left: &str, right: &str) -> Option<usize> {
        self.ranks.get(left)?.get(right).copied()
    }

    pub fn continuation_marker(&self) -> &'static str {
        CONTINUATION_MARKER
    }
}

type Pair = (String, String);

#[derive(PartialEq, Eq)]
struct Candidate {
    count: u64,
    pair: Pair,
}

// Max-heap order: highest count first, then the lexicographically smallest pair.
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.count.cmp(&other.count).then_with(|| other.pair.cmp(&self.pair))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct LearnState {
    words: Vec<(Vec<String>, u64)>,
    pair_counts: BTreeMap<Pair, u64>,
    locations: BTreeMap<Pair, BTreeSet<usize>>,
}

impl LearnState {
    fn add_pairs(&mut self, idx: usize, changed: &mut BTreeSet<Pair>) {
        let (symbols, count) = &self.words[idx];
        for w in symbols.windows(2) {
            let pair = (w[0].clone(), w[1].clone());
            *self.pair_counts.entry(pair.clone()).or_insert(0) += count;
            self.locations.entry(pair.clone()).or_default().insert(idx);
            changed.insert(pair);
        }
    }

    fn remove_pairs(&mut self, idx: usize, changed: &mut BTreeSet<Pair>) {
        let (symbols, count) = &self.words[idx];
        for w in symbols.windows(2) {
            let pair = (w[0].clone(), w[1].clone());
            if let Some(c) = self.pair_counts.get_mut(&pair) {
                *c -= count;
                if *c == 0 {
                    self.pair_counts.remove(&pair);
                }
            }
            changed.insert(pair);
        }
    }
}

fn merge_symbols(symbols: &[String], left: &str, right: &str) -> Vec<String> {
    let mut out = Vec::with_capacity(symbols.len());
    let mut i = 0;
    while i < symbols.len() {
        if i + 1 < symbols.len() && symbols[i] == left && symbols[i + 1] == right {
            let mut merged = String::with_capacity(left.len() + right.len());
            merged.push_str(left);
            merged.push_str(right);
            out.push(merged);
            i += 2;
        } else {
            out.push(symbols[i].clone());
            i += 1;
        }
    }
    out
}

/// Learns up to `num_merges` merges from weighted words.
///
/// Each step merges the most frequent adjacent symbol pair (ties go to the
/// lexicographically smallest pair). Learning stops early once no pair occurs
/// at least twice, so the result may be shorter than requested.
pub fn learn_bpe(word_counts: &Vocabulary, num_merges: usize) -> MergeTable {
    let mut state = LearnState {
        words: word_counts
            .iter()
            .map(|(w, c)| (w.chars().map(|ch| ch.to_string()).collect(), c))
            .collect(),
        pair_counts: BTreeMap::new(),
        locations: BTreeMap::new(),
    };
    let mut changed = BTreeSet::new();
    for idx in 0..state.words.len() {
        state.add_pairs(idx, &mut changed);
    }
    let mut heap: BinaryHeap<Candidate> = state
        .pair_counts
        .iter()
        .map(|(pair, &count)| Candidate { count, pair: pair.clone() })
        .collect();

    let mut merges: Vec<Pair> = Vec::new();
    let mut learned: BTreeSet<Pair> = BTreeSet::new();
    while merges.len() < num_merges {
        let Some(top) = heap.pop() else { break };
        if state.pair_counts.get(&top.pair).copied() != Some(top.count) || learned.contains(&top.pair)
        {
            continue;
        }
        if top.count < 2 {
            break;
        }
        let (left, right) = top.pair.clone();
        let affected: Vec<usize> = state
            .locations
            .remove(&top.pair)
            .map(|s| s.into_iter().collect())
            .unwrap_or_default();
        changed.clear();
        for idx in affected {
            let symbols = &state.words[idx].0;
            if !symbols.windows(2).any(|w| w[0] == left && w[1] == right) {
                continue;
            }
            let merged = merge_symbols(symbols, &left, &right);
            state.remove_pairs(idx, &mut changed);
            state.words[idx].0 = merged;
            state.add_pairs(idx, &mut changed);
        }
        for pair in &changed {
            if let Some(&count) = state.pair_counts.get(pair) {
                heap.push(Candidate { count, pair: pair.clone() });
            }
        }
        learned.insert(top.pair.clone());
        merges.push(top.pair);
    }
    MergeTable::new(merges).expect("learned merges are unique")
}

struct Piece {
    text: String,
    parts: Option<(usize, usize)>,
}

/// Applies merges to one word, returning the piece arena and the final piece
/// indices in order.
fn encode_word(word: &str, table: &MergeTable) -> (Vec<Piece>, Vec<usize>) {
    let mut arena: Vec<Piece> =
        word.chars().map(|c| Piece { text: c.to_string(), parts: None }).collect();
    let mut symbols: Vec<usize> = (0..arena.len()).collect();
    if table.is_empty() {
        return (arena, symbols);
    }
    let rank_of = |arena: &[Piece], a: usize, b: usize| table.rank(&arena[a].text, &arena[b].text);
    let mut ranks: Vec<Option<usize>> =
        symbols.windows(2).map(|w| rank_of(&arena, w[0], w[1])).collect();

    while let Some(best) = ranks.iter().flatten().min().copied() {
        let mut next = Vec::with_capacity(symbols.len());
        let mut i = 0;
        while i < symbols.len() {
            if i + 1 < symbols.len() && ranks[i] == Some(best) {
                let (a, b) = (symbols[i], symbols[i + 1]);
                let mut text = arena[a].text.clone();
                text.push_str(&arena[b].text);
                arena.push(Piece { text, parts: Some((a, b)) });
                next.push(arena.len() - 1);
                i += 2;
            } else {
                next.push(symbols[i]);
                i += 1;
            }
        }
        symbols = next;
        ranks = symbols.windows(2).map(|w| rank_of(&arena, w[0], w[1])).collect();
    }
    (arena, symbols)
}

fn with_marker(text: &str, is_final: bool) -> String {
    if is_final {
        text.to_string()
    } else {
        let mut s = String::with_capacity(text.len() + CONTINUATION_MARKER.len());
        s.push_str(text);
        s.push_str(CONTINUATION_MARKER);
        s
    }
}

/// Reverts the merge that built `piece` until every resulting token is
/// admitted by the vocabulary or is a single character.
fn split_to_vocab(
    arena: &[Piece],
    piece: usize,
    is_final: bool,
    vocab: &Vocabulary,
    threshold: u64,
    out: &mut Vec<String>,
) {
    let token = with_marker(&arena[piece].text, is_final);
    match arena[piece].parts {
        Some((left, right)) if !vocab.admits(&token, threshold) => {
            split_to_vocab(arena, left, false, vocab, threshold, out);
            split_to_vocab(arena, right, is_final, vocab, threshold, out);
        }
        _ => out.push(token),
    }
}

/// Segments one word into subword tokens.
pub fn apply_bpe_word(
    word: &str,
    table: &MergeTable,
    vocab: Option<&Vocabulary>,
    threshold: u64,
) -> Vec<String> {
    let (arena, symbols) = encode_word(word, table);
    let mut out = Vec::with_capacity(symbols.len());
    let last = symbols.len().saturating_sub(1);
    for (pos, &piece) in symbols.iter().enumerate() {
        let is_final = pos == last;
        match vocab {
            Some(v) => split_to_vocab(&arena, piece, is_final, v, threshold, &mut out),
            None => out.push(with_marker(&arena[piece].text, is_final)),
        }
    }
    out
}

/// Segments every word of `sentence`.
///
/// With a vocabulary, any produced subword token (marker included) that the
/// vocabulary does not admit at `threshold` is split back along its merge
/// history. A threshold of 0 or 1 means plain presence.
pub fn apply_bpe(
    sentence: &Sentence,
    table: &MergeTable,
    vocab: Option<&Vocabulary>,
    threshold: u64,
) -> Sentence {
    let tokens = sentence
        .iter()
        .flat_map(|word| apply_bpe_word(word, table, vocab, threshold))
        .collect();
    Sentence::from_trusted(tokens)
}

/// Joins continuation-marked tokens with their successors.
///
/// Inverts [`apply_bpe`] for every word that does not itself end in the
/// continuation marker.
pub fn undo_bpe(sentence: &Sentence) -> Result<Sentence, BpeError> {
    let mut out = Vec::with_capacity(sentence.len());
    let mut pending = String::new();
    let mut pending_token: Option<&String> = None;
    for token in sentence {
        match token.strip_suffix(CONTINUATION_MARKER) {
            Some(stem) => {
                pending.push_str(stem);
                pending_token = Some(token);
            }
            None => {
                pending.push_str(token);
                out.push(core::mem::take(&mut pending));
                pending_token = None;
            }
        }
    }
    if let Some(token) = pending_token {
        return Err(BpeError::DanglingContinuation { token: token.clone() });
    }
    Ok(Sentence::from_trusted(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn pairs(table: &MergeTable) -> Vec<(&str, &str)> {
        table.merges().iter().map(|(a, b)| (a.as_str(), b.as_str())).collect()
    }

    fn table(merges: &[(&str, &str)]) -> MergeTable {
        MergeTable::new(merges.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect())
            .unwrap()
    }

    fn words(s: &str) -> Sentence {
        Sentence::parse(s).unwrap()
    }

    /// Recounts all pairs from scratch at every step.
    fn naive_learn(vocab: &Vocabulary, num_merges: usize) -> Vec<(String, String)> {
        let mut words: Vec<(Vec<String>, u64)> =
            vocab.iter().map(|(w, c)| (w.chars().map(|c| c.to_string()).collect(), c)).collect();
        let mut merges = Vec::new();
        while merges.len() < num_merges {
            let mut counts: BTreeMap<(String, String), u64> = BTreeMap::new();
            for (syms, c) in &words {
                for w in syms.windows(2) {
                    *counts.entry((w[0].clone(), w[1].clone())).or_insert(0) += c;
                }
            }
            let mut best: Option<((String, String), u64)> = None;
            for (pair, c) in counts {
                if merges.contains(&pair) {
                    continue;
                }
                if best.as_ref().is_none_or(|(_, bc)| c > *bc) {
                    best = Some((pair, c));
                }
            }
            match best {
                Some((pair, c)) if c >= 2 => {
                    for (syms, _) in words.iter_mut() {
                        *syms = merge_symbols(syms, &pair.0, &pair.1);
                    }
                    merges.push(pair);
                }
                _ => break,
            }
        }
        merges
    }

    #[test]
    fn low_lower_tie_breaks_lexicographically() {
        let vocab = Vocabulary::from_counts([("low", 5), ("lower", 2)]);
        // Hand count: (l,o)=7 (o,w)=7 (w,e)=2 (e,r)=2.
        let t = learn_bpe(&vocab, 10);
        assert_eq!(pairs(&t)[0], ("l", "o"));
        // After (l,o): (lo,w)=7 (w,e)=2 (e,r)=2.
        assert_eq!(pairs(&t)[1], ("lo", "w"));
        // Then (e,r)=2 beats (low,e)=2 lexicographically; then (low,er)=2.
        assert_eq!(pairs(&t), [("l", "o"), ("lo", "w"), ("e", "r"), ("low", "er")]);
    }

    #[test]
    fn zero_merges_and_single_characters() {
        let vocab = Vocabulary::from_counts([("low", 5), ("lower", 2)]);
        assert!(learn_bpe(&vocab, 0).is_empty());
        let singles = Vocabulary::from_counts([("a", 9), ("b", 3), ("c", 1)]);
        assert!(learn_bpe(&singles, 100).is_empty());
    }

    #[test]
    fn stops_when_no_pair_repeats() {
        let vocab = Vocabulary::from_counts([("ab", 1), ("cd", 1)]);
        assert!(learn_bpe(&vocab, 5).is_empty());
    }

    #[test]
    fn apply_fully_merged_and_base_segmentation() {
        let t = table(&[("l", "o"), ("lo", "w")]);
        assert_eq!(apply_bpe(&words("low"), &t, None, 1).tokens(), ["low"]);
        assert_eq!(apply_bpe(&words("lower"), &t, None, 1).tokens(), ["low@@", "e@@", "r"]);
        let empty = MergeTable::default();
        assert_eq!(apply_bpe(&words("ab c"), &empty, None, 1).tokens(), ["a@@", "b", "c"]);
    }

    #[test]
    fn vocabulary_filter_reverts_last_merge() {
        let t = table(&[("l", "o"), ("lo", "w")]);
        // "low" is not admitted, "lo@@" is: revert (lo,w) only.
        let vocab = Vocabulary::from_counts([("lo@@", 3), ("w", 2)]);
        assert_eq!(apply_bpe(&words("low"), &t, Some(&vocab), 1).tokens(), ["lo@@", "w"]);
        // Below threshold: split down to characters.
        assert_eq!(apply_bpe(&words("low"), &t, Some(&vocab), 4).tokens(), ["l@@", "o@@", "w"]);
        // Admitted whole word stays.
        let vocab = Vocabulary::from_counts([("low", 1)]);
        assert_eq!(apply_bpe(&words("low"), &t, Some(&vocab), 1).tokens(), ["low"]);
    }

    #[test]
    fn undo_examples() {
        assert_eq!(undo_bpe(&words("lo@@ w")).unwrap().tokens(), ["low"]);
        assert_eq!(undo_bpe(&words("a b")).unwrap().tokens(), ["a", "b"]);
        assert_eq!(
            undo_bpe(&words("a lo@@")).unwrap_err(),
            BpeError::DanglingContinuation { token: "lo@@".into() }
        );
    }

    #[test]
    fn duplicate_merge_rejected() {
        let err = MergeTable::new(vec![("a".into(), "b".into()), ("a".into(), "b".into())]);
        assert!(matches!(err, Err(BpeError::DuplicateMerge { .. })));
    }

    fn word_strategy() -> impl Strategy<Value = String> {
        "[a-e]{1,8}"
    }

    proptest! {
        #[test]
        fn incremental_learning_matches_naive_recount(
            ws in proptest::collection::btree_map(word_strategy(), 1u64..6, 1..12),
            n in 0usize..30,
        ) {
            let vocab = Vocabulary::from_counts(ws);
            let t = learn_bpe(&vocab, n);
            prop_assert_eq!(t.merges().to_vec(), naive_learn(&vocab, n));
        }

        #[test]
        fn merge_tables_extend_as_prefixes(
            ws in proptest::collection::btree_map(word_strategy(), 1u64..6, 1..12),
            n in 0usize..20,
        ) {
            let vocab = Vocabulary::from_counts(ws);
            let short = learn_bpe(&vocab, n);
            let long = learn_bpe(&vocab, n + 1);
            prop_assert_eq!(&long.merges()[..short.len()], short.merges());
        }

        #[test]
        fn undo_inverts_apply(
            ws in proptest::collection::btree_map(word_strategy(), 1u64..6, 1..12),
            sent in proptest::collection::vec(word_strategy(), 1..8),
            n in 0usize..30,
        ) {
            let t = learn_bpe(&Vocabulary::from_counts(ws), n);
            let s = Sentence::new(sent).unwrap();
            let seg = apply_bpe(&s, &t, None, 1);
            prop_assert_eq!(undo_bpe(&seg).unwrap(), s);
        }
    }
}
