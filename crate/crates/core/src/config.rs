//! Run configuration: one JSON file drives every command, carrying the
//! seed, cache location, metric defaults, translation options, adapter
//! settings, and the named translation systems.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rtt::{
    DropoutTranslator, HttpConfig, HttpTranslator, IdentityTranslator, ReverseWordsTranslator,
    RttError, TranslateOptions, Translator,
};
use crate::textmetrics::{
    Aggregation, MetricError, MetricId, MetricName, Smoothing, SubwordVocab,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {detail}")]
    Parse { path: PathBuf, detail: String },
    #[error("unknown system {0:?}")]
    UnknownSystem(String),
    #[error("system reference cycle: {0}")]
    Cycle(String),
    #[error("system {0:?} is stochastic but the config has no seed")]
    SeedRequired(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Rtt(#[from] RttError),
}

/// Metric defaults, overridable per invocation by CLI flags.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct MetricSettings {
    /// Metric registry names to compute.
    pub names: Vec<String>,
    /// Smoothing for bleu-family metrics, e.g. "floor(0.1)", "add-k(1)",
    /// "none".
    pub smoothing: Option<String>,
    /// "corpus-level" or "sentence-average".
    pub aggregation: Option<String>,
    /// chrF recall weight.
    pub beta: Option<f64>,
    /// Subword vocabulary file; required when spbleu is among the names.
    pub vocab: Option<PathBuf>,
}

impl Default for MetricSettings {
    fn default() -> Self {
        MetricSettings {
            names: vec!["bleu-13a".to_string()],
            smoothing: None,
            aggregation: None,
            beta: None,
            vocab: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TranslateSettings {
    pub batch_size: usize,
    pub concurrency: usize,
}

impl Default for TranslateSettings {
    fn default() -> Self {
        let opts = TranslateOptions::default();
        TranslateSettings { batch_size: opts.batch_size, concurrency: opts.concurrency }
    }
}

/// Remote-service defaults shared by all http systems in the config.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct AdapterSettings {
    pub endpoint: Option<String>,
    pub path: Option<String>,
    /// Environment variable naming, not containing, the auth token.
    pub auth_env: Option<String>,
    pub timeout_secs: u64,
    pub retries: u32,
    pub backoff_ms: u64,
}

impl Default for AdapterSettings {
    fn default() -> Self {
        let base = HttpConfig::default();
        AdapterSettings {
            endpoint: None,
            path: None,
            auth_env: None,
            timeout_secs: base.timeout.as_secs(),
            retries: base.retries,
            backoff_ms: base.backoff.as_millis() as u64,
        }
    }
}

/// One named translation system.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemSpec {
    /// Returns inputs verbatim.
    Identity,
    /// Reverses word order; a deterministic stand-in for a lossless but
    /// non-trivial system.
    ReverseWords,
    /// Deletes a seeded fraction of tokens, then delegates to `base`
    /// (identity when absent).
    Dropout { rate: f64, #[serde(skip_serializing_if = "Option::is_none", default)] base: Option<String> },
    /// Remote service; unset fields fall back to the adapter settings.
    Http {
        #[serde(skip_serializing_if = "Option::is_none", default)]
        endpoint: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        path: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        auth_env: Option<String>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Master seed; every stochastic system derives its own sub-seed from
    /// it and its name.
    pub seed: Option<u64>,
    pub cache_dir: Option<PathBuf>,
    pub metrics: MetricSettings,
    pub translate: TranslateSettings,
    pub adapter: AdapterSettings,
    pub systems: BTreeMap<String, SystemSpec>,
}

/// Stable sub-seed for a named component under the master seed.
pub fn derive_seed(seed: u64, name: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(b"rtt-qe.system");
    hasher.update(seed.to_le_bytes());
    hasher.update(name.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is long enough"))
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text)
        .map_err(|e| ConfigError::Parse { path: path.to_path_buf(), detail: e.to_string() })
}

impl RunConfig {
    pub fn translate_options(&self) -> TranslateOptions {
        TranslateOptions {
            batch_size: self.translate.batch_size.max(1),
            concurrency: self.translate.concurrency.max(1),
        }
    }

    /// Hex digest of the canonical JSON form; embedded in output files so
    /// results stay traceable to the configuration that produced them.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        hex::encode(hasher.finalize())
    }

    /// Metric identifiers from `names` (or the config default), with the
    /// config's smoothing/aggregation/beta applied.
    pub fn metric_ids(&self, names: Option<&[String]>) -> Result<Vec<MetricId>, ConfigError> {
        let names = names.unwrap_or(&self.metrics.names);
        let mut out = Vec::with_capacity(names.len());
        for name in names {
            let mut id = MetricId::from_name(name)?;
            if id.name.is_bleu_family() {
                if let Some(s) = &self.metrics.smoothing {
                    id = id.with_smoothing(s.parse::<Smoothing>()?);
                }
            }
            if let Some(a) = &self.metrics.aggregation {
                id = id.with_aggregation(Aggregation::parse(a)?);
            }
            if let Some(beta) = self.metrics.beta {
                id = id.with_beta(beta);
            }
            out.push(id);
        }
        Ok(out)
    }

    /// The subword vocabulary when one is configured and any requested
    /// metric needs it.
    pub fn load_vocab(&self, metrics: &[MetricId]) -> Result<Option<SubwordVocab>, ConfigError> {
        if !metrics.iter().any(|m| m.name == MetricName::Spbleu) {
            return Ok(None);
        }
        match &self.metrics.vocab {
            Some(path) => SubwordVocab::from_path(path)
                .map(Some)
                .map_err(|source| ConfigError::Io { path: path.clone(), source }),
            None => Err(MetricError::MissingVocab.into()),
        }
    }

    /// Instantiate a named system. Names not present in the config fall
    /// back to the built-ins "identity" and "reverse-words".
    pub fn build_system(&self, name: &str) -> Result<Arc<dyn Translator>, ConfigError> {
        let mut stack = Vec::new();
        self.build_system_inner(name, &mut stack)
    }

    fn build_system_inner(
        &self,
        name: &str,
        stack: &mut Vec<String>,
    ) -> Result<Arc<dyn Translator>, ConfigError> {
        if stack.iter().any(|n| n == name) {
            stack.push(name.to_string());
            return Err(ConfigError::Cycle(stack.join(" -> ")));
        }
        stack.push(name.to_string());
        let spec = match self.systems.get(name) {
            Some(spec) => spec.clone(),
            None => match name {
                "identity" => SystemSpec::Identity,
                "reverse-words" => SystemSpec::ReverseWords,
                _ => return Err(ConfigError::UnknownSystem(name.to_string())),
            },
        };
        let system: Arc<dyn Translator> = match spec {
            SystemSpec::Identity => Arc::new(IdentityTranslator),
            SystemSpec::ReverseWords => Arc::new(ReverseWordsTranslator),
            SystemSpec::Dropout { rate, base } => {
                let seed = self.seed.ok_or_else(|| ConfigError::SeedRequired(name.to_string()))?;
                let base = self.build_system_inner(base.as_deref().unwrap_or("identity"), stack)?;
                Arc::new(DropoutTranslator::new(base, rate, derive_seed(seed, name))?.with_id(name))
            }
            SystemSpec::Http { endpoint, path, auth_env } => {
                let config = HttpConfig {
                    endpoint: endpoint
                        .or_else(|| self.adapter.endpoint.clone())
                        .unwrap_or_default(),
                    path: path
                        .or_else(|| self.adapter.path.clone())
                        .unwrap_or_else(|| HttpConfig::default().path),
                    system_id: name.to_string(),
                    auth_env: auth_env.or_else(|| self.adapter.auth_env.clone()),
                    timeout: Duration::from_secs(self.adapter.timeout_secs),
                    retries: self.adapter.retries,
                    backoff: Duration::from_millis(self.adapter.backoff_ms),
                };
                Arc::new(HttpTranslator::new(config)?)
            }
        };
        stack.pop();
        Ok(system)
    }
}
