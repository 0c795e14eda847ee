use serde::{Deserialize, Serialize};

use super::ngram::ngram_counts;
use super::tokenize::normalize_nfc;

pub const CHRF_ORDER: usize = 6;
pub const CHRF_BETA: f64 = 2.0;

/// Additive character n-gram statistics for orders 1..=6.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ChrfStats {
    pub match_counts: [u64; CHRF_ORDER],
    pub hyp_counts: [u64; CHRF_ORDER],
    pub ref_counts: [u64; CHRF_ORDER],
}

impl ChrfStats {
    pub fn add(&mut self, other: &ChrfStats) {
        for k in 0..CHRF_ORDER {
            self.match_counts[k] += other.match_counts[k];
            self.hyp_counts[k] += other.hyp_counts[k];
            self.ref_counts[k] += other.ref_counts[k];
        }
    }

    pub fn sum<'a>(parts: impl IntoIterator<Item = &'a ChrfStats>) -> ChrfStats {
        let mut acc = ChrfStats::default();
        for part in parts {
            acc.add(part);
        }
        acc
    }
}

fn metric_chars(text: &str) -> Vec<char> {
    normalize_nfc(text)
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect()
}

/// Clipped character n-gram statistics of one segment. All whitespace is
/// removed before extraction.
pub fn chrf_stats(hyp: &str, reference: &str) -> ChrfStats {
    let hyp_chars = metric_chars(hyp);
    let ref_chars = metric_chars(reference);
    let mut stats = ChrfStats::default();
    for k in 1..=CHRF_ORDER {
        let hyp_grams = ngram_counts(&hyp_chars, k).unwrap();
        let ref_grams = ngram_counts(&ref_chars, k).unwrap();
        stats.match_counts[k - 1] = hyp_grams.clipped_matches(&ref_grams);
        stats.hyp_counts[k - 1] = hyp_grams.total();
        stats.ref_counts[k - 1] = ref_grams.total();
    }
    stats
}

/// chrF from aggregated statistics: F_beta over the mean character n-gram
/// precision and recall.
///
/// An order where neither side has any n-grams carries no information and is
/// left out of the means (identity on short text still scores 100). An order
/// where only one side has n-grams stays in the means and contributes 0 on
/// the empty side.
pub fn chrf_from_stats(stats: &ChrfStats, beta: f64) -> f64 {
    let mut precision_sum = 0.0;
    let mut recall_sum = 0.0;
    let mut included = 0u32;
    for k in 0..CHRF_ORDER {
        let matches = stats.match_counts[k] as f64;
        let hyp = stats.hyp_counts[k];
        let reference = stats.ref_counts[k];
        if hyp == 0 && reference == 0 {
            continue;
        }
        included += 1;
        if hyp > 0 {
            precision_sum += matches / hyp as f64;
        }
        if reference > 0 {
            recall_sum += matches / reference as f64;
        }
    }
    if included == 0 {
        return 0.0;
    }
    let precision = precision_sum / included as f64;
    let recall = recall_sum / included as f64;
    if precision + recall == 0.0 {
        return 0.0;
    }
    let b2 = beta * beta;
    100.0 * (1.0 + b2) * precision * recall / (b2 * precision + recall)
}

/// Segment chrF (character orders 1..=6).
pub fn chrf_score(hyp: &str, reference: &str, beta: f64) -> f64 {
    chrf_from_stats(&chrf_stats(hyp, reference), beta)
}
