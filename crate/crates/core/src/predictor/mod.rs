//! Linear prediction of forward translation quality from round-trip
//! features: feature assembly, ordinary least squares, and model files.

mod features;
mod model;
mod ols;

pub use features::{
    build_features, build_training_set, DirectionMode, FeatureKey, FeatureKind, FeatureRow,
    FeatureSpec, FeatureTable, TrainingSample, TrainingSet,
};
pub use model::{
    load_model, save_model, LinearPredictor, Standardization, TrainingMeta, MODEL_FORMAT_VERSION,
};
pub use ols::{fit_ols, predict, predict_rows, residual_sum_of_squares};

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PredictorError {
    #[error("feature spec has no features")]
    EmptySpec,
    #[error("duplicate feature {0}")]
    DuplicateFeature(String),
    #[error("bad feature name {name}: {detail}")]
    BadFeatureName { name: String, detail: String },
    #[error("no training samples")]
    NoSamples,
    #[error("feature row has {got} values, spec has {expected}")]
    FeatureWidth { expected: usize, got: usize },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("model format version {found:?} unsupported (expected {expected:?})")]
    VersionMismatch { found: String, expected: String },
    #[error("model has {weights} weights for {features} features")]
    WeightCount { weights: usize, features: usize },
    #[error("standardization has {got} columns for {features} features")]
    StandardizationShape { got: usize, features: usize },
    #[error("{field}: cannot parse {value:?} as a number")]
    BadNumber { field: String, value: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {detail}")]
    Format { path: PathBuf, detail: String },
}
