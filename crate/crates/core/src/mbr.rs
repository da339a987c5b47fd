//! Minimum Bayes risk consensus selection over a pool of candidates.
//!
//! The selected candidate maximizes its average utility against every pool
//! member, itself included.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::ngram;

/// Maximum character n-gram order of chrF.
pub const CHRF_ORDER: usize = 6;
/// Recall weight of chrF.
pub const CHRF_BETA: f64 = 2.0;
/// Maximum n-gram order of sentence BLEU.
pub const SENTENCE_BLEU_ORDER: usize = 4;
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UtilityKind {
    /// Character n-gram F-score (n = 1..6, beta = 2) on the space-joined string.
    Chrf,
    /// Add-one smoothed 4-gram BLEU with brevity penalty.
    SentenceBleu,
    ExactMatch,
}

impl UtilityKind {
    pub fn name(self) -> &'static str {
        match self {
            UtilityKind::Chrf => "chrf",
            UtilityKind::SentenceBleu => "sbleu",
            UtilityKind::ExactMatch => "exact",
        }
    }
}

impl fmt::Display for UtilityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for UtilityKind {
    type Err = MbrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "chrf" => Ok(UtilityKind::Chrf),
            "sbleu" | "sentence_bleu" => Ok(UtilityKind::SentenceBleu),
            "exact" | "exact_match" => Ok(UtilityKind::ExactMatch),
            other => Err(MbrError::UnknownUtility(String::from(other))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MbrError {
    EmptyPool,
    UnknownUtility(String),
}

impl fmt::Display for MbrError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MbrError::EmptyPool => f.write_str("candidate pool is empty"),
            MbrError::UnknownUtility(s) => {
                write!(f, "unknown utility {s:?} (expected chrf, sbleu or exact)")
            }
        }
    }
}

impl core::error::Error for MbrError {}

fn joined_chars<S: AsRef<str>>(tokens: &[S]) -> Vec<char> {
    let mut out = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.extend(t.as_ref().chars());
    }
    out
}

fn chrf(hyp: &[char], reference: &[char]) -> f64 {
    let (mut precision, mut recall, mut orders) = (0.0, 0.0, 0);
    for n in 1..=CHRF_ORDER {
        let hyp_total = ngram::total(hyp.len(), n);
        let ref_total = ngram::total(reference.len(), n);
        if hyp_total == 0 || ref_total == 0 {
            continue;
        }
        let matches = ngram::clipped_matches(&ngram::counts(hyp, n), &ngram::counts(reference, n));
        precision += matches as f64 / hyp_total as f64;
        recall += matches as f64 / ref_total as f64;
        orders += 1;
    }
    if orders == 0 {
        return 0.0;
    }
    precision /= orders as f64;
    recall /= orders as f64;
    let beta2 = CHRF_BETA * CHRF_BETA;
    let denom = beta2 * precision + recall;
    if denom <= 0.0 {
        0.0
    } else {
        (1.0 + beta2) * precision * recall / denom
    }
}

fn sentence_bleu<S: AsRef<str>>(hyp: &[S], reference: &[S]) -> f64 {
    let hyp: Vec<&str> = hyp.iter().map(AsRef::as_ref).collect();
    let reference: Vec<&str> = reference.iter().map(AsRef::as_ref).collect();
    let mut log_sum = 0.0;
    for n in 1..=SENTENCE_BLEU_ORDER {
        let matches = ngram::clipped_matches(&ngram::counts(&hyp, n), &ngram::counts(&reference, n));
        let total = ngram::total(hyp.len(), n);
        log_sum += libm::log((matches + 1) as f64 / (total + 1) as f64);
    }
    let (c, r) = (hyp.len() as f64, reference.len() as f64);
    let bp = if c >= r { 1.0 } else { libm::exp(1.0 - r / c) };
    bp * libm::exp(log_sum / SENTENCE_BLEU_ORDER as f64)
}

/// Similarity in [0, 1]. Two empty sequences score 1, one empty sequence 0.
pub fn utility<S: AsRef<str>>(hyp: &[S], reference: &[S], kind: UtilityKind) -> f64 {
    match (hyp.is_empty(), reference.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    match kind {
        UtilityKind::ExactMatch => {
            let equal = hyp.iter().zip(reference).all(|(a, b)| a.as_ref() == b.as_ref())
                && hyp.len() == reference.len();
            if equal { 1.0 } else { 0.0 }
        }
        UtilityKind::Chrf => chrf(&joined_chars(hyp), &joined_chars(reference)),
        UtilityKind::SentenceBleu => sentence_bleu(hyp, reference),
    }
}

/// Average utility of each candidate against the whole pool (self included).
pub fn expected_utilities<T, S>(pool: &[T], kind: UtilityKind) -> Vec<f64>
where
    T: AsRef<[S]>,
    S: AsRef<str>,
{
    let n = pool.len() as f64;
    pool.iter()
        .map(|hyp| {
            let sum: f64 = pool.iter().map(|other| utility(hyp.as_ref(), other.as_ref(), kind)).sum();
            sum / n
        })
        .collect()
}

/// Index and expected utility of the consensus candidate; the smallest index
/// wins ties (scores within `TIE_TOLERANCE` of the maximum).
pub fn mbr_select<T, S>(pool: &[T], kind: UtilityKind) -> Result<(usize, f64), MbrError>
where
    T: AsRef<[S]>,
    S: AsRef<str>,
{
    if pool.is_empty() {
        return Err(MbrError::EmptyPool);
    }
    let scores = expected_utilities(pool, kind);
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Equal expectations can differ in the last bits depending on summation
    // order; treat those as ties.
    let best = scores.iter().position(|&s| s >= max - TIE_TOLERANCE).unwrap_or(0);
    Ok((best, scores[best]))
}

/// Candidates with optional provenance labels (e.g. the permutation that
/// produced them).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CandidatePool {
    candidates: Vec<Vec<String>>,
    labels: Vec<Option<String>>,
}

impl CandidatePool {
    pub fn new(candidates: Vec<Vec<String>>) -> Self {
        let labels = alloc::vec![None; candidates.len()];
        CandidatePool { candidates, labels }
    }

    pub fn push(&mut self, candidate: Vec<String>, label: Option<String>) {
        self.candidates.push(candidate);
        self.labels.push(label);
    }

    pub fn candidates(&self) -> &[Vec<String>] {
        &self.candidates
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.labels.get(index)?.as_deref()
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// The consensus candidate and its index.
    pub fn select(&self, kind: UtilityKind) -> Result<(usize, &[String]), MbrError> {
        let (i, _) = mbr_select(&self.candidates, kind)?;
        Ok((i, &self.candidates[i]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const KINDS: [UtilityKind; 3] = [UtilityKind::Chrf, UtilityKind::SentenceBleu, UtilityKind::ExactMatch];

    #[test]
    fn identity_scores_one() {
        for k in KINDS {
            assert_eq!(utility(&["the", "cat"], &["the", "cat"], k), 1.0);
            let empty: [&str; 0] = [];
            assert_eq!(utility(&empty, &empty, k), 1.0);
            assert_eq!(utility(&empty, &["a"], k), 0.0);
            assert_eq!(utility(&["a"], &empty, k), 0.0);
        }
    }

    #[test]
    fn disjoint_characters_score_zero() {
        assert_eq!(utility(&["abc"], &["xyz"], UtilityKind::Chrf), 0.0);
    }

    #[test]
    fn chrf_hand_example() {
        // "the cat" vs "the cat sat": every hyp n-gram (n <= 6) occurs in the
        // reference, so precision is 1 for each order. Recall per order is
        // (8 - n) / (12 - n).
        let recall: f64 = (1..=6).map(|n| (8 - n) as f64 / (12 - n) as f64).sum::<f64>() / 6.0;
        let expect = 5.0 * recall / (4.0 + recall);
        let got = utility(&["the", "cat"], &["the", "cat", "sat"], UtilityKind::Chrf);
        assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
    }

    #[test]
    fn sentence_bleu_hand_example() {
        // hyp = ref prefix: matches = totals, so precisions (c+1)/(c+1) = 1;
        // only the brevity penalty exp(1 - 3/2) remains.
        let got = utility(&["a", "b"], &["a", "b", "c"], UtilityKind::SentenceBleu);
        assert!((got - libm::exp(-0.5)).abs() < 1e-12);
    }

    #[test]
    fn sole_candidate_and_modal_candidate() {
        let pool = vec![vec!["x"]];
        assert_eq!(mbr_select(&pool, UtilityKind::Chrf).unwrap().0, 0);
        let pool = vec![vec!["a", "b"], vec!["a", "b"], vec!["c"]];
        let (i, score) = mbr_select(&pool, UtilityKind::ExactMatch).unwrap();
        assert_eq!(i, 0);
        assert!((score - 2.0 / 3.0).abs() < 1e-12);
        let scores = expected_utilities(&pool, UtilityKind::ExactMatch);
        assert!((scores[2] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_pool_rejected() {
        let pool: Vec<Vec<&str>> = vec![];
        assert_eq!(mbr_select(&pool, UtilityKind::Chrf), Err(MbrError::EmptyPool));
    }

    #[test]
    fn ties_go_to_smallest_index() {
        let pool = vec![vec!["a"], vec!["b"], vec!["c"]];
        assert_eq!(mbr_select(&pool, UtilityKind::ExactMatch).unwrap().0, 0);
    }

    #[test]
    fn pool_labels() {
        let mut pool = CandidatePool::default();
        pool.push(vec!["a".into()], Some("<123>".into()));
        pool.push(vec!["b".into()], None);
        pool.push(vec!["b".into()], None);
        assert_eq!(pool.select(UtilityKind::ExactMatch).unwrap(), (1, &["b".into()][..]));
        assert_eq!(pool.label(0), Some("<123>"));
        assert_eq!(pool.label(1), None);
    }

    #[test]
    fn utility_names_parse() {
        for k in KINDS {
            assert_eq!(k.name().parse::<UtilityKind>().unwrap(), k);
        }
        assert!("beer".parse::<UtilityKind>().is_err());
    }
}
