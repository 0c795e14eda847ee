//! Model persistence. Weights travel as decimal strings in their shortest
//! round-trip form, so a loaded model is bit-identical to the saved one.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::FeatureSpec;
use super::PredictorError;
use crate::textmetrics::MetricId;

pub const MODEL_FORMAT_VERSION: &str = "1";

/// Per-feature z-scoring parameters applied before the affine map.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingMeta {
    pub n_samples: usize,
    pub language_pairs: Vec<String>,
    pub created_at: String,
}

/// A fitted affine predictor. Immutable once constructed; share freely
/// across prediction threads.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPredictor {
    pub target_metric: MetricId,
    pub spec: FeatureSpec,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub standardization: Option<Standardization>,
    pub training: TrainingMeta,
}

/// Creation timestamp, overridable through SOURCE_DATE_EPOCH for
/// reproducible artifacts.
pub fn timestamp_now() -> String {
    created_at(std::env::var("SOURCE_DATE_EPOCH").ok().as_deref())
}

fn created_at(source_date_epoch: Option<&str>) -> String {
    source_date_epoch
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0))
        .unwrap_or_else(chrono::Utc::now)
        .to_rfc3339()
}

#[derive(Serialize, Deserialize)]
struct StandardizationFile {
    means: Vec<String>,
    stds: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct TrainingFile {
    n_samples: usize,
    language_pairs: Vec<String>,
    created_at: String,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: String,
    target_metric: MetricId,
    feature_names: Vec<String>,
    weights: Vec<String>,
    intercept: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    standardization: Option<StandardizationFile>,
    training: TrainingFile,
}

/// Shortest decimal that parses back to the identical f64.
fn encode_f64(v: f64) -> String {
    format!("{}", v)
}

fn decode_f64(field: String, text: &str) -> Result<f64, PredictorError> {
    text.parse::<f64>().map_err(|_| PredictorError::BadNumber { field, value: text.to_string() })
}

pub fn save_model(path: &Path, model: &LinearPredictor) -> Result<(), PredictorError> {
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION.to_string(),
        target_metric: model.target_metric.clone(),
        feature_names: model.spec.names(),
        weights: model.weights.iter().map(|w| encode_f64(*w)).collect(),
        intercept: encode_f64(model.intercept),
        standardization: model.standardization.as_ref().map(|s| StandardizationFile {
            means: s.means.iter().map(|m| encode_f64(*m)).collect(),
            stds: s.stds.iter().map(|m| encode_f64(*m)).collect(),
        }),
        training: TrainingFile {
            n_samples: model.training.n_samples,
            language_pairs: model.training.language_pairs.clone(),
            created_at: model.training.created_at.clone(),
        },
    };
    let mut text = serde_json::to_string_pretty(&file).expect("model serializes");
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|source| PredictorError::Io { path: path.to_path_buf(), source })
}

pub fn load_model(path: &Path) -> Result<LinearPredictor, PredictorError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| PredictorError::Io { path: path.to_path_buf(), source })?;
    let file: ModelFile = serde_json::from_str(&text)
        .map_err(|e| PredictorError::Format { path: path.to_path_buf(), detail: e.to_string() })?;
    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(PredictorError::VersionMismatch {
            found: file.format_version,
            expected: MODEL_FORMAT_VERSION.to_string(),
        });
    }
    let spec = FeatureSpec::from_names(&file.feature_names)?;
    if file.weights.len() != spec.len() {
        return Err(PredictorError::WeightCount {
            weights: file.weights.len(),
            features: spec.len(),
        });
    }
    let weights = file
        .weights
        .iter()
        .enumerate()
        .map(|(i, w)| decode_f64(format!("weights[{}]", i), w))
        .collect::<Result<Vec<_>, _>>()?;
    let intercept = decode_f64("intercept".to_string(), &file.intercept)?;
    let standardization = match file.standardization {
        Some(s) => {
            if s.means.len() != spec.len() || s.stds.len() != spec.len() {
                return Err(PredictorError::StandardizationShape {
                    got: s.means.len().max(s.stds.len()),
                    features: spec.len(),
                });
            }
            let means = s
                .means
                .iter()
                .enumerate()
                .map(|(i, m)| decode_f64(format!("standardization.means[{}]", i), m))
                .collect::<Result<Vec<_>, _>>()?;
            let stds = s
                .stds
                .iter()
                .enumerate()
                .map(|(i, m)| decode_f64(format!("standardization.stds[{}]", i), m))
                .collect::<Result<Vec<_>, _>>()?;
            Some(Standardization { means, stds })
        }
        None => None,
    };
    Ok(LinearPredictor {
        target_metric: file.target_metric,
        spec,
        weights,
        intercept,
        standardization,
        training: TrainingMeta {
            n_samples: file.training.n_samples,
            language_pairs: file.training.language_pairs,
            created_at: file.training.created_at,
        },
    })
}
