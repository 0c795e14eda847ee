//! Reference-free machine translation quality estimation via round-trip
//! translation.
//!
//! The toolkit translates a monolingual corpus out to another language and
//! back, scores the reconstruction against the original text (Self-Score),
//! and fits a linear predictor mapping Self-Scores to the forward translation
//! quality (Trans-Score) that would normally require parallel references.
//!
//! Modules:
//! - [`textmetrics`]: tokenization, BLEU, chrF, subword BLEU, feature stats.
//! - [`rtt`]: translator abstraction, round trips, caching, HTTP adapter,
//!   deterministic mock translators, copy-rate analysis.
//! - [`scoring`]: Trans-Score / Self-Score computation and score records.
//! - [`predictor`]: feature assembly, least-squares fitting, prediction,
//!   model persistence.
//! - [`analysis`]: MAE/RMSE, Pearson r, Kendall tau-b, correlation reports,
//!   system ranking.
//! - [`dataset`]: corpus loading, parallel alignment, language registry and
//!   pair partitioning.
//! - [`config`] and [`cli`]: reproducible run configuration and the `rtt-qe`
//!   command-line front end.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod predictor;
pub mod rtt;
pub mod scoring;
pub mod textmetrics;

/// Version string embedded in output file headers.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
