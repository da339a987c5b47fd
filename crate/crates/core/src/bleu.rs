//! Corpus-level BLEU over token sequences.

use alloc::vec::Vec;
use core::fmt;

use crate::ngram;

pub const BLEU_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BleuError {
    LengthMismatch { hyps: usize, refs: usize },
    Empty,
}

impl fmt::Display for BleuError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BleuError::LengthMismatch { hyps, refs } => {
                write!(f, "{hyps} hypotheses but {refs} references")
            }
            BleuError::Empty => f.write_str("no sentences to score"),
        }
    }
}

impl core::error::Error for BleuError {}

#[derive(Debug, Clone, PartialEq)]
pub struct BleuReport {
    /// 0..=100.
    pub score: f64,
    /// Clipped n-gram matches, n = 1..4.
    pub matches: [u64; BLEU_ORDER],
    /// Hypothesis n-gram totals, n = 1..4.
    pub totals: [u64; BLEU_ORDER],
    pub brevity_penalty: f64,
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl BleuReport {
    /// Precision of order `n` (1-based); `None` when the hypotheses hold no
    /// `n`-grams at all.
    pub fn precision(&self, n: usize) -> Option<f64> {
        let total = self.totals[n - 1];
        (total > 0).then(|| self.matches[n - 1] as f64 / total as f64)
    }
}

impl fmt::Display for BleuReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p: Vec<f64> = (1..=BLEU_ORDER).map(|n| 100.0 * self.precision(n).unwrap_or(0.0)).collect();
        write!(
            f,
            "BLEU = {:.2} ({:.1}/{:.1}/{:.1}/{:.1}, BP={:.3})",
            self.score, p[0], p[1], p[2], p[3], self.brevity_penalty
        )
    }
}

/// Unsmoothed corpus BLEU: clipped n-gram counts aggregated over all
/// sentences, geometric mean of the precisions, times the brevity penalty.
///
/// Orders for which the hypotheses contain no n-grams at all (every
/// hypothesis shorter than n) are left out of the mean, so a corpus scored
/// against itself is always 100.
pub fn corpus_bleu<H, R, S>(hyps: &[H], refs: &[R]) -> Result<BleuReport, BleuError>
where
    H: AsRef<[S]>,
    R: AsRef<[S]>,
    S: AsRef<str>,
{
    if hyps.len() != refs.len() {
        return Err(BleuError::LengthMismatch { hyps: hyps.len(), refs: refs.len() });
    }
    if hyps.is_empty() {
        return Err(BleuError::Empty);
    }
    let mut matches = [0u64; BLEU_ORDER];
    let mut totals = [0u64; BLEU_ORDER];
    let (mut hyp_len, mut ref_len) = (0u64, 0u64);
    for (hyp, reference) in hyps.iter().zip(refs) {
        let hyp: Vec<&str> = hyp.as_ref().iter().map(AsRef::as_ref).collect();
        let reference: Vec<&str> = reference.as_ref().iter().map(AsRef::as_ref).collect();
        hyp_len += hyp.len() as u64;
        ref_len += reference.len() as u64;
        for n in 1..=BLEU_ORDER {
            matches[n - 1] += ngram::clipped_matches(&ngram::counts(&hyp, n), &ngram::counts(&reference, n));
            totals[n - 1] += ngram::total(hyp.len(), n);
        }
    }

    let brevity_penalty = if hyp_len == 0 {
        if ref_len == 0 { 1.0 } else { 0.0 }
    } else if hyp_len >= ref_len {
        1.0
    } else {
        libm::exp(1.0 - ref_len as f64 / hyp_len as f64)
    };

    let mut log_sum = 0.0;
    let mut orders = 0;
    let mut zero = false;
    for n in 0..BLEU_ORDER {
        if totals[n] == 0 {
            continue;
        }
        orders += 1;
        if matches[n] == 0 {
            zero = true;
        } else {
            log_sum += libm::log(matches[n] as f64 / totals[n] as f64);
        }
    }
    let score = if zero {
        0.0
    } else if orders == 0 {
        // Nothing to compare: both sides are entirely empty.
        100.0 * brevity_penalty
    } else {
        100.0 * brevity_penalty * libm::exp(log_sum / orders as f64)
    };
    Ok(BleuReport { score, matches, totals, brevity_penalty, hyp_len, ref_len })
}
