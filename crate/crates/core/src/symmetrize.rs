//! Intersection of two directional alignments and bilingual lexicon extraction.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::ParallelCorpus;
use crate::ibm1::{DirectionalAlignment, Direction};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymmetrizeError {
    /// Both alignments point the same way.
    SameDirection(Direction),
    LengthMismatch { source: (usize, usize), target: (usize, usize) },
    AlignmentCount { pairs: usize, alignments: usize },
    LinkOutOfRange { pair: usize, link: (usize, usize) },
    NotOneToOne { link: (usize, usize) },
}

impl fmt::Display for SymmetrizeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymmetrizeError::SameDirection(d) => {
                write!(f, "both alignments are {d}; intersection needs one of each direction")
            }
            SymmetrizeError::LengthMismatch { source, target } => write!(
                f,
                "alignments disagree on sentence lengths (source {} vs {}, target {} vs {})",
                source.0, source.1, target.0, target.1
            ),
            SymmetrizeError::AlignmentCount { pairs, alignments } => {
                write!(f, "{alignments} alignments for {pairs} sentence pairs")
            }
            SymmetrizeError::LinkOutOfRange { pair, link } => {
                write!(f, "pair {pair}: link {}-{} is out of range", link.0, link.1)
            }
            SymmetrizeError::NotOneToOne { link } => {
                write!(f, "link {}-{} reuses a position", link.0, link.1)
            }
        }
    }
}

impl core::error::Error for SymmetrizeError {}

/// One-to-one `(source, target)` links, sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OneToOneAlignment {
    links: Vec<(usize, usize)>,
}

impl OneToOneAlignment {
    pub fn new(links: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, SymmetrizeError> {
        let links: BTreeSet<(usize, usize)> = links.into_iter().collect();
        let mut src = BTreeSet::new();
        let mut tgt = BTreeSet::new();
        for &(i, j) in &links {
            if !src.insert(i) || !tgt.insert(j) {
                return Err(SymmetrizeError::NotOneToOne { link: (i, j) });
            }
        }
        Ok(OneToOneAlignment { links: links.into_iter().collect() })
    }

    pub fn links(&self) -> &[(usize, usize)] {
        &self.links
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }
}

/// Keeps `(i, j)` only when the target-to-source alignment links target `j`
/// to source `i` and the source-to-target alignment links source `i` back to
/// target `j`. Arguments may come in either order.
pub fn intersect(
    a: &DirectionalAlignment,
    b: &DirectionalAlignment,
) -> Result<OneToOneAlignment, SymmetrizeError> {
    let (t2s, s2t) = match (a.direction(), b.direction()) {
        (Direction::TgtToSrc, Direction::SrcToTgt) => (a, b),
        (Direction::SrcToTgt, Direction::TgtToSrc) => (b, a),
        (d, _) => return Err(SymmetrizeError::SameDirection(d)),
    };
    if t2s.source_len() != s2t.source_len() || t2s.target_len() != s2t.target_len() {
        return Err(SymmetrizeError::LengthMismatch {
            source: (t2s.source_len(), s2t.source_len()),
            target: (t2s.target_len(), s2t.target_len()),
        });
    }
    // Each target has at most one t2s link and each source at most one s2t
    // link, so the agreeing links are one-to-one.
    let links = t2s
        .links()
        .iter()
        .enumerate()
        .filter_map(|(j, &i)| {
            let i = i?;
            (s2t.links()[i] == Some(j)).then_some((i, j))
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    Ok(OneToOneAlignment { links })
}

/// Each source word's most frequent one-to-one-aligned target word.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BilingualLexicon {
    entries: BTreeMap<String, (String, u64)>,
    total_links: u64,
}

impl BilingualLexicon {
    /// Builds a lexicon from explicit entries (e.g. read back from disk).
    pub fn from_entries<I>(entries: I, total_links: u64) -> Self
    where
        I: IntoIterator<Item = (String, String, u64)>,
    {
        let entries = entries.into_iter().map(|(s, t, c)| (s, (t, c))).collect();
        BilingualLexicon { entries, total_links }
    }

    pub fn translate(&self, source_word: &str) -> Option<&str> {
        self.entries.get(source_word).map(|(t, _)| t.as_str())
    }

    pub fn get(&self, source_word: &str) -> Option<(&str, u64)> {
        self.entries.get(source_word).map(|(t, c)| (t.as_str(), *c))
    }

    /// Entries sorted by source word.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, u64)> + '_ {
        self.entries.iter().map(|(s, (t, c))| (s.as_str(), t.as_str(), *c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of one-to-one links counted while building the lexicon.
    pub fn total_links(&self) -> u64 {
        self.total_links
    }
}

/// Counts `(source word, target word)` links over the corpus and keeps the
/// most frequent target per source word (lexicographically smallest on ties).
pub fn extract_lexicon(
    corpus: &ParallelCorpus,
    alignments: &[OneToOneAlignment],
) -> Result<BilingualLexicon, SymmetrizeError> {
    if corpus.len() != alignments.len() {
        return Err(SymmetrizeError::AlignmentCount {
            pairs: corpus.len(),
            alignments: alignments.len(),
        });
    }
    let mut counts: BTreeMap<&str, BTreeMap<&str, u64>> = BTreeMap::new();
    let mut total_links = 0;
    for (pair, ((source, target), alignment)) in corpus.pairs().iter().zip(alignments).enumerate() {
        for &(i, j) in alignment.links() {
            if i >= source.len() || j >= target.len() {
                return Err(SymmetrizeError::LinkOutOfRange { pair, link: (i, j) });
            }
            *counts.entry(&source[i]).or_default().entry(&target[j]).or_insert(0) += 1;
            total_links += 1;
        }
    }
    let entries = counts
        .into_iter()
        .map(|(s, row)| {
            // Rows iterate in ascending target order, so keeping the first
            // maximum resolves ties lexicographically.
            let mut best: Option<(&str, u64)> = None;
            for (t, c) in row {
                if best.is_none_or(|(_, bc)| c > bc) {
                    best = Some((t, c));
                }
            }
            let (t, c) = best.expect("rows are non-empty");
            (String::from(s), (String::from(t), c))
        })
        .collect();
    Ok(BilingualLexicon { entries, total_links })
}
