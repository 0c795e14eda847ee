use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::RttError;
use crate::textmetrics::tokenize_13a;

/// Word-copy statistics: how much of each output sentence is copied
/// verbatim from its source. Counting is a case-sensitive multiset
/// intersection of 13a tokens.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CopyStats {
    /// Mean per-sentence count of copied tokens.
    pub avg_copy_count: f64,
    /// Mean per-sentence percentage, denominator = output tokens.
    pub avg_copy_pct: f64,
    /// Same percentage with the source-token denominator; reported alongside
    /// because the denominator convention is ambiguous in the wild.
    pub avg_copy_pct_source: f64,
    pub sentences: usize,
}

fn token_counts(text: &str) -> HashMap<String, u64> {
    let mut counts = HashMap::new();
    for token in tokenize_13a(text) {
        *counts.entry(token).or_insert(0) += 1;
    }
    counts
}

/// Per-sentence copied-token counts averaged over a corpus. A sentence with
/// an empty output (or source, for the source-denominator variant)
/// contributes 0 percent.
pub fn copy_stats(sources: &[String], outputs: &[String]) -> Result<CopyStats, RttError> {
    if sources.len() != outputs.len() {
        return Err(RttError::LengthMismatch { sources: sources.len(), outputs: outputs.len() });
    }
    if sources.is_empty() {
        return Err(RttError::EmptyInput);
    }
    let mut count_sum = 0.0;
    let mut pct_sum = 0.0;
    let mut pct_src_sum = 0.0;
    for (source, output) in sources.iter().zip(outputs) {
        let src_counts = token_counts(source);
        let out_counts = token_counts(output);
        let copied: u64 = out_counts
            .iter()
            .map(|(token, &n)| n.min(src_counts.get(token).copied().unwrap_or(0)))
            .sum();
        let out_total: u64 = out_counts.values().sum();
        let src_total: u64 = src_counts.values().sum();
        count_sum += copied as f64;
        if out_total > 0 {
            pct_sum += 100.0 * copied as f64 / out_total as f64;
        }
        if src_total > 0 {
            pct_src_sum += 100.0 * copied as f64 / src_total as f64;
        }
    }
    let n = sources.len() as f64;
    Ok(CopyStats {
        avg_copy_count: count_sum / n,
        avg_copy_pct: pct_sum / n,
        avg_copy_pct_source: pct_src_sum / n,
        sentences: sources.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lines(texts: &[&str]) -> Vec<String> {
        texts.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn identical_sentences_are_all_copy() {
        let corpus = lines(&["a b c", "hello there"]);
        let stats = copy_stats(&corpus, &corpus).unwrap();
        assert_eq!(stats.avg_copy_pct, 100.0);
        assert_eq!(stats.avg_copy_pct_source, 100.0);
        assert_eq!(stats.avg_copy_count, 2.5);
    }

    #[test]
    fn disjoint_sentences_have_no_copy() {
        let stats = copy_stats(&lines(&["a b c"]), &lines(&["x y z"])).unwrap();
        assert_eq!(stats.avg_copy_count, 0.0);
        assert_eq!(stats.avg_copy_pct, 0.0);
    }

    #[test]
    fn hand_case_one_of_two_output_tokens() {
        let stats = copy_stats(&lines(&["a b c"]), &lines(&["a x"])).unwrap();
        assert_eq!(stats.avg_copy_count, 1.0);
        assert_eq!(stats.avg_copy_pct, 50.0);
        assert!((stats.avg_copy_pct_source - 100.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn multiset_counting_clips_repeats() {
        // Output repeats "a" three times, source has it twice.
        let stats = copy_stats(&lines(&["a a b"]), &lines(&["a a a"])).unwrap();
        assert_eq!(stats.avg_copy_count, 2.0);
        assert!((stats.avg_copy_pct - 200.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn counting_is_case_sensitive() {
        let stats = copy_stats(&lines(&["Hello"]), &lines(&["hello"])).unwrap();
        assert_eq!(stats.avg_copy_count, 0.0);
    }

    #[test]
    fn empty_output_contributes_zero_pct() {
        let stats = copy_stats(&lines(&["a b", "c d"]), &lines(&["", "c d"])).unwrap();
        assert_eq!(stats.avg_copy_pct, 50.0);
        assert_eq!(stats.avg_copy_count, 1.0);
    }

    #[test]
    fn length_mismatch_and_empty_lists_are_rejected() {
        assert!(matches!(
            copy_stats(&lines(&["a"]), &lines(&["a", "b"])),
            Err(RttError::LengthMismatch { sources: 1, outputs: 2 })
        ));
        assert!(matches!(copy_stats(&[], &[]), Err(RttError::EmptyInput)));
    }
}
