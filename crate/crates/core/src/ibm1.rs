//! IBM Model 1 lexical translation tables trained with EM, Viterbi
//! alignment, and the corpus log-likelihood used to monitor training.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::{ParallelCorpus, Sentence, Side};

/// Moses' default number of Model 1 iterations.
pub const DEFAULT_EM_ITERATIONS: usize = 5;

/// Label of the empty conditioning word in table files.
pub const NULL_WORD: &str = "<null>";

/// Floor applied to a token probability when scoring unseen events.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Which way the links point. `TgtToSrc` links every target word to one
/// source word (or NULL): the source conditions, the target is emitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    SrcToTgt,
    TgtToSrc,
}

impl Direction {
    pub fn conditioning_side(self) -> Side {
        match self {
            Direction::SrcToTgt => Side::Target,
            Direction::TgtToSrc => Side::Source,
        }
    }

    pub fn emitted_side(self) -> Side {
        match self {
            Direction::SrcToTgt => Side::Source,
            Direction::TgtToSrc => Side::Target,
        }
    }

    pub fn reverse(self) -> Direction {
        match self {
            Direction::SrcToTgt => Direction::TgtToSrc,
            Direction::TgtToSrc => Direction::SrcToTgt,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Direction::SrcToTgt => "src2tgt",
            Direction::TgtToSrc => "tgt2src",
        }
    }

    /// `(conditioning, emitted)` sentences of a pair.
    pub fn split<'a>(self, source: &'a Sentence, target: &'a Sentence) -> (&'a Sentence, &'a Sentence) {
        match self {
            Direction::SrcToTgt => (target, source),
            Direction::TgtToSrc => (source, target),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl core::str::FromStr for Direction {
    type Err = AlignError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "src2tgt" | "src_to_tgt" => Ok(Direction::SrcToTgt),
            "tgt2src" | "tgt_to_src" => Ok(Direction::TgtToSrc),
            _ => Err(AlignError::UnknownDirection),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AlignError {
    ZeroIterations,
    EmptyCorpus,
    UnknownDirection,
    InvalidProbability { conditioning: Option<String>, emitted: String, prob: f64 },
    LinkOutOfRange { emitted: usize, link: usize, conditioning_len: usize },
    DirectionMismatch { expected: Direction, found: Direction },
}

impl fmt::Display for AlignError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlignError::ZeroIterations => f.write_str("EM needs at least one iteration"),
            AlignError::EmptyCorpus => f.write_str("cannot train on an empty corpus"),
            AlignError::UnknownDirection => f.write_str("direction must be src2tgt or tgt2src"),
            AlignError::InvalidProbability { conditioning, emitted, prob } => write!(
                f,
                "probability {prob} for ({}, {emitted}) is outside [0, 1]",
                conditioning.as_deref().unwrap_or(NULL_WORD)
            ),
            AlignError::LinkOutOfRange { emitted, link, conditioning_len } => write!(
                f,
                "position {emitted} links to {link}, but the conditioning sentence has {conditioning_len} words"
            ),
            AlignError::DirectionMismatch { expected, found } => {
                write!(f, "expected a {expected} alignment, got {found}")
            }
        }
    }
}

impl core::error::Error for AlignError {}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Interner {
    words: Vec<String>,
    ids: BTreeMap<String, u32>,
}

impl Interner {
    /// Ids follow lexicographic order of the words.
    fn from_sorted(words: BTreeSet<String>) -> Self {
        let ids = words.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect();
        Interner { words: words.into_iter().collect(), ids }
    }

    fn id(&self, word: &str) -> Option<u32> {
        self.ids.get(word).copied()
    }
}

/// Conditional probabilities t(emitted | conditioning), including the NULL
/// conditioning word. Rows are stored sparsely: only pairs that co-occurred
/// in training (or were listed explicitly) have an entry.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationTable {
    direction: Direction,
    conditioning: Interner,
    emitted: Interner,
    // rows[0] is NULL; rows[k + 1] belongs to conditioning id k.
    rows: Vec<Vec<(u32, f64)>>,
}

impl TranslationTable {
    /// Builds a table from explicit entries; `None` is the NULL word.
    /// Entries are not renormalized.
    pub fn from_entries<I>(direction: Direction, entries: I) -> Result<Self, AlignError>
    where
        I: IntoIterator<Item = (Option<String>, String, f64)>,
    {
        let entries: Vec<_> = entries.into_iter().collect();
        for (c, e, p) in &entries {
            if !(0.0..=1.0).contains(p) {
                return Err(AlignError::InvalidProbability {
                    conditioning: c.clone(),
                    emitted: e.clone(),
                    prob: *p,
                });
            }
        }
        let conditioning =
            Interner::from_sorted(entries.iter().filter_map(|(c, _, _)| c.clone()).collect());
        let emitted = Interner::from_sorted(entries.iter().map(|(_, e, _)| e.clone()).collect());
        let mut rows = vec![Vec::new(); conditioning.words.len() + 1];
        for (c, e, p) in entries {
            let row = c.map_or(0, |w| conditioning.id(&w).unwrap() as usize + 1);
            let col = emitted.id(&e).unwrap();
            match rows[row].binary_search_by_key(&col, |&(k, _)| k) {
                Ok(i) => rows[row][i].1 = p,
                Err(i) => rows[row].insert(i, (col, p)),
            }
        }
        Ok(TranslationTable { direction, conditioning, emitted, rows })
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    fn row_of(&self, conditioning: Option<&str>) -> Option<usize> {
        match conditioning {
            None => Some(0),
            Some(w) => self.conditioning.id(w).map(|id| id as usize + 1),
        }
    }

    fn lookup(&self, row: usize, emitted: u32) -> f64 {
        let row = &self.rows[row];
        row.binary_search_by_key(&emitted, |&(k, _)| k).map_or(0.0, |i| row[i].1)
    }

    /// t(emitted | conditioning); 0 for pairs without an entry.
    pub fn prob(&self, conditioning: Option<&str>, emitted: &str) -> f64 {
        match (self.row_of(conditioning), self.emitted.id(emitted)) {
            (Some(row), Some(col)) => self.lookup(row, col),
            _ => 0.0,
        }
    }

    /// All entries ordered by conditioning word (NULL first), then emitted word.
    pub fn entries(&self) -> impl Iterator<Item = (Option<&str>, &str, f64)> + '_ {
        self.rows.iter().enumerate().flat_map(move |(row, cells)| {
            let cond = if row == 0 { None } else { Some(self.conditioning.words[row - 1].as_str()) };
            cells.iter().map(move |&(col, p)| (cond, self.emitted.words[col as usize].as_str(), p))
        })
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest deviation of any non-empty row sum from 1.
    pub fn max_normalization_error(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| !r.is_empty())
            .map(|r| (r.iter().map(|&(_, p)| p).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Incremental EM over one corpus in one direction.
#[derive(Debug, Clone)]
pub struct Model1Trainer {
    table: TranslationTable,
    // Per pair: conditioning row indices (NULL row 0 first), emitted ids.
    encoded: Vec<(Vec<usize>, Vec<u32>)>,
    iterations: usize,
}

impl Model1Trainer {
    /// Initializes t(f|e) uniformly over the words f co-occurring with e.
    pub fn new(corpus: &ParallelCorpus, direction: Direction) -> Result<Self, AlignError> {
        if corpus.is_empty() {
            return Err(AlignError::EmptyCorpus);
        }
        let conditioning = Interner::from_sorted(
            corpus.side(direction.conditioning_side()).flatten().cloned().collect(),
        );
        let emitted =
            Interner::from_sorted(corpus.side(direction.emitted_side()).flatten().cloned().collect());

        let mut cooc: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); conditioning.words.len() + 1];
        let mut encoded = Vec::with_capacity(corpus.len());
        for (source, target) in corpus.pairs() {
            let (cond, emit) = direction.split(source, target);
            let mut rows = Vec::with_capacity(cond.len() + 1);
            rows.push(0);
            rows.extend(cond.iter().map(|w| conditioning.id(w).unwrap() as usize + 1));
            let cols: Vec<u32> = emit.iter().map(|w| emitted.id(w).unwrap()).collect();
            for &row in &rows {
                cooc[row].extend(cols.iter().copied());
            }
            encoded.push((rows, cols));
        }
        let rows = cooc
            .into_iter()
            .map(|cols| {
                let p = 1.0 / cols.len().max(1) as f64;
                cols.into_iter().map(|c| (c, p)).collect()
            })
            .collect();
        Ok(Model1Trainer {
            table: TranslationTable { direction, conditioning, emitted, rows },
            encoded,
            iterations: 0,
        })
    }

    /// One E-step over every pair followed by the per-word M-step.
    pub fn step(&mut self) {
        let rows = &self.table.rows;
        let mut counts: Vec<Vec<f64>> = rows.iter().map(|r| vec![0.0; r.len()]).collect();
        let mut cells: Vec<(usize, f64)> = Vec::new();
        for (cond, emit) in &self.encoded {
            for &f in emit {
                cells.clear();
                let mut denom = 0.0;
                for &e in cond {
                    let i = rows[e]
                        .binary_search_by_key(&f, |&(k, _)| k)
                        .expect("co-occurring pairs have an entry");
                    let t = rows[e][i].1;
                    denom += t;
                    cells.push((i, t));
                }
                if denom <= 0.0 {
                    continue;
                }
                for (&e, &(i, t)) in cond.iter().zip(&cells) {
                    counts[e][i] += t / denom;
                }
            }
        }
        for (row, row_counts) in self.table.rows.iter_mut().zip(counts) {
            let total: f64 = row_counts.iter().sum();
            if total > 0.0 {
                for (cell, c) in row.iter_mut().zip(row_counts) {
                    cell.1 = c / total;
                }
            }
        }
        self.iterations += 1;
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn table(&self) -> &TranslationTable {
        &self.table
    }

    pub fn into_table(self) -> TranslationTable {
        self.table
    }
}

/// Runs `iterations` EM sweeps of IBM Model 1.
pub fn train_model1(
    corpus: &ParallelCorpus,
    direction: Direction,
    iterations: usize,
) -> Result<TranslationTable, AlignError> {
    if iterations == 0 {
        return Err(AlignError::ZeroIterations);
    }
    let mut trainer = Model1Trainer::new(corpus, direction)?;
    for _ in 0..iterations {
        trainer.step();
    }
    Ok(trainer.into_table())
}

/// Model 1 corpus log-likelihood with a uniform 1/(l+1) alignment prior
/// (NULL included). Each emitted token contributes at least ln(1e-12).
pub fn log_likelihood(table: &TranslationTable, corpus: &ParallelCorpus) -> f64 {
    let mut total = 0.0;
    for (source, target) in corpus.pairs() {
        let (cond, emit) = table.direction.split(source, target);
        let rows: Vec<Option<usize>> = core::iter::once(Some(0))
            .chain(cond.iter().map(|w| table.row_of(Some(w))))
            .collect();
        let prior = 1.0 / rows.len() as f64;
        for f in emit {
            let p = match table.emitted.id(f) {
                Some(col) => rows.iter().flatten().map(|&r| table.lookup(r, col)).sum::<f64>() * prior,
                None => 0.0,
            };
            total += libm::log(p.max(PROBABILITY_FLOOR));
        }
    }
    total
}

/// Links from each emitted position to one conditioning position, or `None`
/// for NULL.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionalAlignment {
    direction: Direction,
    conditioning_len: usize,
    links: Vec<Option<usize>>,
}

impl DirectionalAlignment {
    pub fn new(
        direction: Direction,
        conditioning_len: usize,
        links: Vec<Option<usize>>,
    ) -> Result<Self, AlignError> {
        for (emitted, link) in links.iter().enumerate() {
            if let Some(link) = *link {
                if link >= conditioning_len {
                    return Err(AlignError::LinkOutOfRange { emitted, link, conditioning_len });
                }
            }
        }
        Ok(DirectionalAlignment { direction, conditioning_len, links })
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn conditioning_len(&self) -> usize {
        self.conditioning_len
    }

    /// Number of emitted positions.
    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn links(&self) -> &[Option<usize>] {
        &self.links
    }

    /// Non-NULL links as `(conditioning, emitted)` positions, by emitted position.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.links.iter().enumerate().filter_map(|(j, a)| a.map(|i| (i, j)))
    }

    /// Non-NULL links as `(source, target)` positions.
    pub fn source_target_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let flip = self.direction == Direction::SrcToTgt;
        self.pairs().map(move |(c, e)| if flip { (e, c) } else { (c, e) })
    }

    pub fn source_len(&self) -> usize {
        match self.direction {
            Direction::SrcToTgt => self.links.len(),
            Direction::TgtToSrc => self.conditioning_len,
        }
    }

    pub fn target_len(&self) -> usize {
        match self.direction {
            Direction::SrcToTgt => self.conditioning_len,
            Direction::TgtToSrc => self.links.len(),
        }
    }
}

/// Links each emitted word to its most probable conditioning word. Ties go to
/// the smallest position; NULL only wins when it is strictly more probable
/// than every real position. Words without any entry link to NULL.
pub fn viterbi_align(table: &TranslationTable, source: &Sentence, target: &Sentence) -> DirectionalAlignment {
    let (cond, emit) = table.direction.split(source, target);
    let rows: Vec<Option<usize>> = cond.iter().map(|w| table.row_of(Some(w))).collect();
    let links = emit
        .iter()
        .map(|f| {
            let col = table.emitted.id(f)?;
            let null_p = table.lookup(0, col);
            let mut best: Option<(usize, f64)> = None;
            for (i, row) in rows.iter().enumerate() {
                let p = row.map_or(0.0, |r| table.lookup(r, col));
                if best.is_none_or(|(_, bp)| p > bp) {
                    best = Some((i, p));
                }
            }
            match best {
                Some((i, p)) if p > 0.0 && p >= null_p => Some(i),
                _ => None,
            }
        })
        .collect();
    DirectionalAlignment { direction: table.direction, conditioning_len: cond.len(), links }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn corpus(pairs: &[(&str, &str)]) -> ParallelCorpus {
        ParallelCorpus::new(
            pairs
                .iter()
                .map(|(s, t)| (Sentence::parse(s).unwrap(), Sentence::parse(t).unwrap()))
                .collect(),
        )
        .unwrap()
    }

    fn toy() -> ParallelCorpus {
        corpus(&[("das haus", "the house"), ("das buch", "the book")])
    }

    #[test]
    fn single_pair_one_iteration() {
        // Init: t(x|a) = t(x|NULL) = 1. E-step posterior splits the token 1/2 : 1/2,
        // and the M-step renormalizes each single-entry row back to 1.
        let c = corpus(&[("a", "x")]);
        let t = train_model1(&c, Direction::TgtToSrc, 1).unwrap();
        assert_eq!(t.prob(Some("a"), "x"), 1.0);
        assert_eq!(t.prob(None, "x"), 1.0);
        let links = viterbi_align(&t, &c.pairs()[0].0, &c.pairs()[0].1);
        assert_eq!(links.links(), [Some(0)]);
    }

    #[test]
    fn toy_corpus_prefers_the_for_das() {
        let t = train_model1(&toy(), Direction::TgtToSrc, 5).unwrap();
        let the = t.prob(Some("das"), "the");
        assert!(the > t.prob(Some("das"), "house"));
        assert!(the > t.prob(Some("das"), "book"));
        assert!(t.max_normalization_error() < 1e-9);
        let c = toy();
        let (s, g) = &c.pairs()[0];
        let a = viterbi_align(&t, s, g);
        assert_eq!(a.links()[0], Some(0));
    }

    #[test]
    fn zero_iterations_and_empty_corpus_rejected() {
        assert_eq!(train_model1(&toy(), Direction::TgtToSrc, 0), Err(AlignError::ZeroIterations));
        let empty = ParallelCorpus::default();
        assert_eq!(
            train_model1(&empty, Direction::SrcToTgt, 5).unwrap_err(),
            AlignError::EmptyCorpus
        );
    }

    #[test]
    fn log_likelihood_closed_form() {
        // Only (a, x) has mass; NULL contributes nothing: ln((1 + 0) / 2).
        let t = TranslationTable::from_entries(
            Direction::TgtToSrc,
            [(Some("a".to_string()), "x".to_string(), 1.0)],
        )
        .unwrap();
        let ll = log_likelihood(&t, &corpus(&[("a", "x")]));
        assert!((ll - libm::log(0.5)).abs() < 1e-15);
    }

    #[test]
    fn log_likelihood_floor_for_unseen() {
        let t = TranslationTable::from_entries(Direction::TgtToSrc, []).unwrap();
        let ll = log_likelihood(&t, &corpus(&[("a", "x y")]));
        assert!((ll - 2.0 * libm::log(PROBABILITY_FLOOR)).abs() < 1e-9);
    }

    #[test]
    fn em_is_monotone_on_toy() {
        let c = toy();
        let mut trainer = Model1Trainer::new(&c, Direction::TgtToSrc).unwrap();
        let mut prev = log_likelihood(trainer.table(), &c);
        for _ in 0..10 {
            trainer.step();
            let ll = log_likelihood(trainer.table(), &c);
            assert!(ll >= prev - 1e-9, "{ll} < {prev}");
            assert!(trainer.table().max_normalization_error() < 1e-9);
            prev = ll;
        }
    }

    #[test]
    fn unseen_word_links_to_null() {
        let t = train_model1(&toy(), Direction::TgtToSrc, 5).unwrap();
        let s = Sentence::parse("das haus").unwrap();
        let g = Sentence::parse("the zebra").unwrap();
        assert_eq!(viterbi_align(&t, &s, &g).links()[1], None);
    }

    #[test]
    fn ties_go_to_smallest_position_and_null_loses_ties() {
        let entries = [
            (Some("a".to_string()), "x".to_string(), 0.5),
            (Some("b".to_string()), "x".to_string(), 0.5),
            (None, "x".to_string(), 0.5),
        ];
        let t = TranslationTable::from_entries(Direction::TgtToSrc, entries).unwrap();
        let s = Sentence::parse("b a").unwrap();
        let g = Sentence::parse("x").unwrap();
        assert_eq!(viterbi_align(&t, &s, &g).links(), [Some(0)]);
    }

    #[test]
    fn null_wins_when_strictly_better() {
        let entries = [
            (Some("a".to_string()), "x".to_string(), 0.2),
            (None, "x".to_string(), 0.6),
        ];
        let t = TranslationTable::from_entries(Direction::TgtToSrc, entries).unwrap();
        let s = Sentence::parse("a").unwrap();
        let g = Sentence::parse("x").unwrap();
        assert_eq!(viterbi_align(&t, &s, &g).links(), [None]);
    }

    #[test]
    fn bijection_recovered_with_repetition() {
        let c = corpus(&[
            ("a b", "x y"),
            ("a b", "x y"),
            ("a c", "x z"),
            ("c b", "z y"),
        ]);
        for dir in [Direction::TgtToSrc, Direction::SrcToTgt] {
            let t = train_model1(&c, dir, 10).unwrap();
            for (s, g) in c.pairs() {
                let a = viterbi_align(&t, s, g);
                for (i, j) in a.source_target_pairs() {
                    let expect = match s[i].as_str() {
                        "a" => "x",
                        "b" => "y",
                        _ => "z",
                    };
                    assert_eq!(g[j], expect);
                }
            }
        }
    }

    #[test]
    fn src_to_tgt_swaps_roles() {
        let t = train_model1(&toy(), Direction::SrcToTgt, 5).unwrap();
        assert!(t.prob(Some("the"), "das") > t.prob(Some("the"), "haus"));
        let c = toy();
        let (s, g) = &c.pairs()[0];
        let a = viterbi_align(&t, s, g);
        assert_eq!(a.len(), s.len());
        assert_eq!(a.conditioning_len(), g.len());
    }

    #[test]
    fn out_of_range_link_rejected() {
        let err = DirectionalAlignment::new(Direction::TgtToSrc, 2, alloc::vec![Some(2)]);
        assert!(matches!(err, Err(AlignError::LinkOutOfRange { .. })));
    }
}
