//! Command-line front end: argument definitions, dispatch, error-to-exit
//! mapping.
//!
//! Exit codes: 0 success, 1 validation or usage error, 2 translation
//! service / transport failure.

mod commands;

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::config::{load_config, ConfigError, RunConfig};
use crate::dataset::DatasetError;
use crate::predictor::PredictorError;
use crate::rtt::RttError;
use crate::scoring::ScoreError;
use crate::textmetrics::MetricError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_ADAPTER: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Rtt(#[from] RttError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Predictor(#[from] PredictorError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Validation(String),
}

impl CliError {
    fn is_adapter_failure(&self) -> bool {
        match self {
            CliError::Rtt(e) => e.is_adapter_failure(),
            CliError::Score(ScoreError::Rtt(e)) => e.is_adapter_failure(),
            CliError::Config(ConfigError::Rtt(e)) => e.is_adapter_failure(),
            _ => false,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_adapter_failure() {
            EXIT_ADAPTER
        } else {
            EXIT_VALIDATION
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rtt-qe",
    version = crate::TOOL_VERSION,
    about = "Reference-free MT quality estimation via round-trip translation"
)]
pub struct Cli {
    /// Run configuration file (JSON).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Round-trip a corpus and write the forward and reconstructed text
    /// next to the source.
    Roundtrip(RoundtripArgs),
    /// Compute forward and round-trip scores over language pairs.
    Score(ScoreArgs),
    /// Fit a linear predictor from a score-record file.
    Fit(FitArgs),
    /// Predict forward scores from round-trip records with a fitted model.
    Predict(PredictArgs),
    /// Compare predictions against ground truth (MAE, RMSE, correlations).
    Eval(EvalArgs),
    /// Rank systems by predicted score, with rank correlation when true
    /// scores are given.
    Rank(RankArgs),
    /// Measure verbatim source-token copying in translator output.
    Copystats(CopystatsArgs),
    /// Materialize the 17 token-dropout pseudo-competitor systems as a
    /// loadable config.
    Synth(SynthArgs),
    /// Partition a language registry into Type I/II/III ordered pairs.
    Partition(PartitionArgs),
}

#[derive(Debug, Args)]
pub struct RoundtripArgs {
    /// Source corpus, one segment per line.
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    /// Language code of the source corpus.
    #[arg(long, value_name = "LANG")]
    pub src: String,
    /// Language code to translate into.
    #[arg(long, value_name = "LANG")]
    pub tgt: String,
    /// Forward system name.
    #[arg(long, value_name = "SYSTEM")]
    pub fwd: String,
    /// Back system name (defaults to the forward system).
    #[arg(long, value_name = "SYSTEM")]
    pub back: Option<String>,
    /// Directory for outputs (defaults to the corpus directory).
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Ordered language pair as SRC-TGT; repeatable.
    #[arg(long = "pair", value_name = "SRC-TGT", required = true)]
    pub pairs: Vec<String>,
    /// Corpus file for one language as LANG=PATH; repeatable.
    #[arg(long = "corpus", value_name = "LANG=PATH", required = true)]
    pub corpora: Vec<String>,
    /// Systems to score, comma-separated (default: every config system).
    #[arg(long, value_delimiter = ',', value_name = "NAME")]
    pub systems: Vec<String>,
    /// Metrics to compute, comma-separated (default: config metrics).
    #[arg(long, value_delimiter = ',', value_name = "NAME")]
    pub metrics: Vec<String>,
    /// Score-record output file (line-delimited JSON).
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Also write (self, trans) scatter points as CSV.
    #[arg(long, value_name = "FILE")]
    pub plot_data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Score-record file(s) to train from; repeatable.
    #[arg(long = "records", value_name = "FILE", required = true)]
    pub records: Vec<PathBuf>,
    /// Metric whose forward score is the training target (default: first
    /// config metric).
    #[arg(long, value_name = "NAME")]
    pub target_metric: Option<String>,
    /// Feature names, comma-separated (default: both round-trip scores of
    /// the target metric).
    #[arg(long, value_delimiter = ',', value_name = "FEATURE")]
    pub features: Vec<String>,
    /// Z-score features before fitting; scaling is stored in the model.
    #[arg(long)]
    pub standardize: bool,
    /// Model output file (JSON).
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Fitted model file.
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Score-record file with the round-trip features.
    #[arg(long, value_name = "FILE")]
    pub records: PathBuf,
    /// Prediction output file (line-delimited JSON).
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Clamp predictions into [0, 100].
    #[arg(long)]
    pub clamp: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predicted scores, whitespace-separated floats.
    #[arg(long, value_name = "FILE")]
    pub pred: PathBuf,
    /// True scores, same layout as --pred.
    #[arg(long, value_name = "FILE")]
    pub truth: PathBuf,
    /// Write the report as JSON.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Write (pred, truth) scatter points as CSV.
    #[arg(long, value_name = "FILE")]
    pub plot_data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Entries CSV: system,predicted[,truth], optional header line.
    #[arg(long, value_name = "FILE")]
    pub entries: PathBuf,
    /// Write the ranking report as JSON.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CopystatsArgs {
    /// Source corpus.
    #[arg(long, value_name = "FILE")]
    pub source: PathBuf,
    /// Translator output corpus, aligned line-for-line with the source.
    #[arg(long, value_name = "FILE")]
    pub output: PathBuf,
    /// Also print per-sentence counts.
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Config file to write.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Master seed (falls back to the config seed).
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Base system each dropout system damages and delegates to.
    #[arg(long, value_name = "SYSTEM", default_value = "identity")]
    pub base: String,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    /// Registry CSV (code,resource,usage); defaults to the bundled
    /// 33-language registry.
    #[arg(long, value_name = "FILE")]
    pub registry: Option<PathBuf>,
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Roundtrip(args) => commands::roundtrip(&config, &args),
        Command::Score(args) => commands::score(&config, &args),
        Command::Fit(args) => commands::fit(&config, &args),
        Command::Predict(args) => commands::predict(&config, &args),
        Command::Eval(args) => commands::eval(&config, &args),
        Command::Rank(args) => commands::rank(&config, &args),
        Command::Copystats(args) => commands::copystats(&config, &args),
        Command::Synth(args) => commands::synth(&config, &args),
        Command::Partition(args) => commands::partition(&config, &args),
    }
}

/// Parse arguments, run the command, and produce the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_VALIDATION,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(err) => {
            eprintln!("error: {}", err);
            let mut source = std::error::Error::source(&err);
            while let Some(inner) = source {
                eprintln!("  caused by: {}", inner);
                source = inner.source();
            }
            err.exit_code()
        }
    }
}
