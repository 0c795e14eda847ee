use std::collections::HashMap;
use std::hash::Hash;

use super::MetricError;

/// Multiset of the contiguous length-n windows of a sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NgramMultiset<T: Eq + Hash> {
    order: usize,
    counts: HashMap<Vec<T>, u64>,
}

impl<T: Eq + Hash + Clone> NgramMultiset<T> {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Count of one n-gram, 0 when absent.
    pub fn count(&self, key: &[T]) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    /// Number of distinct n-grams.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    /// Total n-grams counted, i.e. max(0, len - n + 1) of the source sequence.
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Clipped match count: sum over this multiset's n-grams of
    /// min(count here, count in `reference`).
    pub fn clipped_matches(&self, reference: &NgramMultiset<T>) -> u64 {
        debug_assert_eq!(self.order, reference.order);
        self.counts
            .iter()
            .map(|(key, &n)| n.min(reference.count(key)))
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<T>, u64)> {
        self.counts.iter().map(|(k, &v)| (k, v))
    }
}

/// Count every contiguous length-n window of `seq`. A sequence shorter than
/// n yields an empty multiset.
pub fn ngram_counts<T: Eq + Hash + Clone>(
    seq: &[T],
    n: usize,
) -> Result<NgramMultiset<T>, MetricError> {
    if n == 0 {
        return Err(MetricError::ZeroOrder);
    }
    let mut counts: HashMap<Vec<T>, u64> = HashMap::new();
    if seq.len() >= n {
        for window in seq.windows(n) {
            *counts.entry(window.to_vec()).or_insert(0) += 1;
        }
    }
    Ok(NgramMultiset { order: n, counts })
}
