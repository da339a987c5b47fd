//! N-gram multiset counting shared by the BLEU and chrF scorers.

use alloc::collections::BTreeMap;

/// Counts of every contiguous `n`-gram of `items`.
pub fn counts<T: Ord>(items: &[T], n: usize) -> BTreeMap<&[T], u64> {
    let mut out = BTreeMap::new();
    if n == 0 || items.len() < n {
        return out;
    }
    for window in items.windows(n) {
        *out.entry(window).or_insert(0) += 1;
    }
    out
}

/// Size of the multiset intersection of two count maps (clipped matches).
pub fn clipped_matches<K: Ord>(hyp: &BTreeMap<K, u64>, reference: &BTreeMap<K, u64>) -> u64 {
    hyp.iter()
        .map(|(gram, &c)| reference.get(gram).map_or(0, |&r| c.min(r)))
        .sum()
}

/// Number of `n`-grams in a sequence of length `len`.
pub fn total(len: usize, n: usize) -> u64 {
    (len + 1).saturating_sub(n) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clipping() {
        let h = ["the", "the", "the"];
        let r = ["the", "cat"];
        assert_eq!(clipped_matches(&counts(&h, 1), &counts(&r, 1)), 1);
        assert_eq!(clipped_matches(&counts(&h, 2), &counts(&r, 2)), 0);
        assert_eq!(total(3, 2), 2);
        assert_eq!(total(1, 2), 0);
    }
}
