//! Deterministic string metrics: tokenization, n-gram statistics, BLEU.
//! chrF, and the auxiliary feature extractors used by the predictor.

mod bleu;
mod chrf;
mod metric;
mod ngram;
mod subword;
mod tokenize;

pub use bleu::{
    aggregate_bleu, bleu_stats, brevity_penalty, feature_stats, BleuOutcome, BleuStats,
    Smoothing, BLEU_ORDER,
};
pub use chrf::{chrf_from_stats, chrf_score, chrf_stats, ChrfStats, CHRF_BETA, CHRF_ORDER};
pub use metric::{score_corpus, Aggregation, CorpusScore, MetricId, MetricName};
pub use ngram::{ngram_counts, NgramMultiset};
pub use subword::SubwordVocab;
pub use tokenize::{normalize_nfc, tokenize_13a, TokenSequence};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("n-gram order must be at least 1")]
    ZeroOrder,
    #[error("hypothesis and reference segment counts differ: {hyp} vs {reference}")]
    SegmentMismatch { hyp: usize, reference: usize },
    #[error("cannot score an empty corpus")]
    EmptyCorpus,
    #[error("spbleu requires a subword vocabulary")]
    MissingVocab,
    #[error("external metric scores are ingested, never computed locally")]
    ExternalMetric,
    #[error("unknown metric name {0:?}")]
    UnknownMetric(String),
    #[error("unknown smoothing mode {0:?}")]
    UnknownSmoothing(String),
    #[error("unknown aggregation mode {0:?}")]
    UnknownAggregation(String),
    #[error("subword vocabulary is empty")]
    EmptyVocab,
    #[error("subword vocabulary line {line}: token contains whitespace")]
    VocabToken { line: usize },
}
