use serde::{Deserialize, Serialize};

use super::bleu::{aggregate_bleu, bleu_stats, BleuStats, Smoothing, BLEU_ORDER};
use super::chrf::{chrf_from_stats, chrf_stats, ChrfStats, CHRF_BETA, CHRF_ORDER};
use super::subword::SubwordVocab;
use super::tokenize::tokenize_13a;
use super::MetricError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MetricName {
    #[serde(rename = "bleu-13a")]
    Bleu13a,
    #[serde(rename = "spbleu")]
    Spbleu,
    #[serde(rename = "chrf")]
    Chrf,
    /// Scores produced outside the toolkit and ingested as data.
    #[serde(rename = "external")]
    External,
}

impl MetricName {
    pub fn as_str(&self) -> &'static str {
        match self {
            MetricName::Bleu13a => "bleu-13a",
            MetricName::Spbleu => "spbleu",
            MetricName::Chrf => "chrf",
            MetricName::External => "external",
        }
    }

    pub fn parse(s: &str) -> Result<MetricName, MetricError> {
        match s {
            "bleu-13a" => Ok(MetricName::Bleu13a),
            "spbleu" => Ok(MetricName::Spbleu),
            "chrf" => Ok(MetricName::Chrf),
            "external" => Ok(MetricName::External),
            other => Err(MetricError::UnknownMetric(other.to_string())),
        }
    }

    pub fn is_bleu_family(&self) -> bool {
        matches!(self, MetricName::Bleu13a | MetricName::Spbleu)
    }
}

impl std::fmt::Display for MetricName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How per-segment measurements become one corpus score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Aggregation {
    /// Sufficient statistics summed over segments, scored once (the standard
    /// toolkit behavior).
    #[default]
    #[serde(rename = "corpus-level")]
    CorpusLevel,
    /// Arithmetic mean of per-segment scores.
    #[serde(rename = "sentence-average")]
    SentenceAverage,
}

impl Aggregation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Aggregation::CorpusLevel => "corpus-level",
            Aggregation::SentenceAverage => "sentence-average",
        }
    }

    pub fn parse(s: &str) -> Result<Aggregation, MetricError> {
        match s {
            "corpus-level" => Ok(Aggregation::CorpusLevel),
            "sentence-average" => Ok(Aggregation::SentenceAverage),
            other => Err(MetricError::UnknownAggregation(other.to_string())),
        }
    }
}

impl std::fmt::Display for Aggregation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A fully specified metric: family plus every parameter that affects the
/// number it produces. Word BLEU is order 4, chrF is character order 6 with
/// beta 2; those are fixed by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricId {
    pub name: MetricName,
    pub max_order: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub beta: Option<f64>,
    pub smoothing: Smoothing,
    pub aggregation: Aggregation,
}

impl MetricId {
    pub fn bleu_13a() -> MetricId {
        MetricId {
            name: MetricName::Bleu13a,
            max_order: BLEU_ORDER,
            beta: None,
            smoothing: Smoothing::default(),
            aggregation: Aggregation::default(),
        }
    }

    pub fn spbleu() -> MetricId {
        MetricId { name: MetricName::Spbleu, ..MetricId::bleu_13a() }
    }

    pub fn chrf() -> MetricId {
        MetricId {
            name: MetricName::Chrf,
            max_order: CHRF_ORDER,
            beta: Some(CHRF_BETA),
            smoothing: Smoothing::None,
            aggregation: Aggregation::default(),
        }
    }

    pub fn external() -> MetricId {
        MetricId {
            name: MetricName::External,
            max_order: 0,
            beta: None,
            smoothing: Smoothing::None,
            aggregation: Aggregation::default(),
        }
    }

    /// Metric from its registry name, with default parameters.
    pub fn from_name(name: &str) -> Result<MetricId, MetricError> {
        Ok(match MetricName::parse(name)? {
            MetricName::Bleu13a => MetricId::bleu_13a(),
            MetricName::Spbleu => MetricId::spbleu(),
            MetricName::Chrf => MetricId::chrf(),
            MetricName::External => MetricId::external(),
        })
    }

    pub fn with_smoothing(mut self, smoothing: Smoothing) -> MetricId {
        self.smoothing = smoothing;
        self
    }

    pub fn with_aggregation(mut self, aggregation: Aggregation) -> MetricId {
        self.aggregation = aggregation;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> MetricId {
        if self.name == MetricName::Chrf {
            self.beta = Some(beta);
        }
        self
    }
}

/// A scored corpus plus the aggregated BLEU statistics when the metric has
/// them (they feed the predictor's auxiliary features).
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusScore {
    pub score: f64,
    /// True when every hypothesis was empty and the score is a forced 0.
    pub degenerate: bool,
    pub bleu: Option<BleuStats>,
    pub segments: usize,
}

fn bleu_corpus(
    metric: &MetricId,
    hyps: &[Vec<String>],
    refs: &[Vec<String>],
) -> CorpusScore {
    let per_segment: Vec<BleuStats> = hyps
        .iter()
        .zip(refs)
        .map(|(h, r)| bleu_stats(h, r))
        .collect();
    let total = BleuStats::sum(per_segment.iter());
    let score = match metric.aggregation {
        Aggregation::CorpusLevel => aggregate_bleu(&total, metric.smoothing).score,
        Aggregation::SentenceAverage => {
            let sum: f64 = per_segment
                .iter()
                .map(|s| aggregate_bleu(s, metric.smoothing).score)
                .sum();
            sum / per_segment.len() as f64
        }
    };
    CorpusScore {
        score,
        degenerate: total.total_counts[0] == 0,
        bleu: Some(total),
        segments: hyps.len(),
    }
}

/// Score a hypothesis corpus against a reference corpus under `metric`.
/// `vocab` is consulted only for spbleu.
pub fn score_corpus(
    metric: &MetricId,
    vocab: Option<&SubwordVocab>,
    hyps: &[String],
    refs: &[String],
) -> Result<CorpusScore, MetricError> {
    if hyps.len() != refs.len() {
        return Err(MetricError::SegmentMismatch { hyp: hyps.len(), reference: refs.len() });
    }
    if hyps.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    match metric.name {
        MetricName::Bleu13a => {
            let hyp_toks: Vec<Vec<String>> = hyps.iter().map(|s| tokenize_13a(s)).collect();
            let ref_toks: Vec<Vec<String>> = refs.iter().map(|s| tokenize_13a(s)).collect();
            Ok(bleu_corpus(metric, &hyp_toks, &ref_toks))
        }
        MetricName::Spbleu => {
            let vocab = vocab.ok_or(MetricError::MissingVocab)?;
            let hyp_toks: Vec<Vec<String>> = hyps.iter().map(|s| vocab.tokenize(s)).collect();
            let ref_toks: Vec<Vec<String>> = refs.iter().map(|s| vocab.tokenize(s)).collect();
            Ok(bleu_corpus(metric, &hyp_toks, &ref_toks))
        }
        MetricName::Chrf => {
            let beta = metric.beta.unwrap_or(CHRF_BETA);
            let per_segment: Vec<ChrfStats> = hyps
                .iter()
                .zip(refs)
                .map(|(h, r)| chrf_stats(h, r))
                .collect();
            let score = match metric.aggregation {
                Aggregation::CorpusLevel => {
                    chrf_from_stats(&ChrfStats::sum(per_segment.iter()), beta)
                }
                Aggregation::SentenceAverage => {
                    let sum: f64 = per_segment.iter().map(|s| chrf_from_stats(s, beta)).sum();
                    sum / per_segment.len() as f64
                }
            };
            Ok(CorpusScore { score, degenerate: false, bleu: None, segments: hyps.len() })
        }
        MetricName::External => Err(MetricError::ExternalMetric),
    }
}
