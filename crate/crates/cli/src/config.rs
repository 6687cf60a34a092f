//! Command-line arguments double as the persisted run configuration: every
//! output written with `--out` gets a `<out>.manifest.json` sidecar holding
//! the resolved arguments (seed included), which `pcmkit replay` can rerun.

use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use pcmkit::acceptance::QuantileChoice;
use pcmkit::sim::{ErrorKind, IndexKind};
use pcmkit::Method;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Jsonl,
    /// Aligned text for reading in a terminal.
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutArg {
    Flat,
    Nested,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Indices, estimates and (optionally) estimation errors of one PCM file.
    Analyze(AnalyzeArgs),
    /// Run a Monte Carlo framework.
    #[command(subcommand)]
    Simulate(Framework),
    /// Class summaries and correlations from a simulation database.
    Report(ReportArgs),
    /// Accept or reject a PCM from its ATI class (exit 3 on reject).
    Accept(AcceptArgs),
    /// Rerun the configuration stored in a manifest file.
    #[serde(skip)]
    Replay { manifest: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Framework {
    /// One entry disturbed by a growing factor eps^k.
    Mse(MseArgs),
    /// Equal errors applied to more and more entries.
    Nee(NeeArgs),
    /// Many small errors plus an optional big one; writes a record database.
    Msobe(MsobeArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct OutputArgs {
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct AnalyzeArgs {
    /// PCM in CSV form (decimals or p/q fractions, one row per line).
    pub pcm: PathBuf,
    /// True priority vector, comma separated, to report AE and RE.
    #[arg(long = "true-pv", value_delimiter = ',', num_args = 1..)]
    pub true_pv: Option<Vec<f64>>,
    /// Seed for the random-index (ASI) estimate.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random matrices used to estimate ASI.
    #[arg(long, default_value_t = 500)]
    pub asi_samples: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct MseArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub runs: usize,
    /// Error increments per run.
    #[arg(long = "ne", default_value_t = 25)]
    pub n_e: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores). Does not affect results.
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub workers: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct NeeArgs {
    #[arg(long)]
    pub n: usize,
    /// Random true vectors.
    #[arg(long = "nr", default_value_t = 200)]
    pub n_r: usize,
    /// Random permutations per vector.
    #[arg(long = "np", default_value_t = 5)]
    pub n_p: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub workers: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct MsobeArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 240_000)]
    pub total: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Small-error laws: `all` or a comma list of gamma, lognormal,
    /// truncnormal, uniform, none.
    #[arg(long = "dist", value_delimiter = ',', default_value = "all")]
    pub distributions: Vec<String>,
    /// Probability that a record receives the big error.
    #[arg(long = "big-prob", default_value_t = 0.75)]
    pub big_prob: f64,
    #[arg(long, value_enum, default_value_t = LayoutArg::Flat)]
    pub layout: LayoutArg,
    /// Records per true vector with `--layout nested`.
    #[arg(long, default_value_t = 100)]
    pub per_vector: usize,
    /// Skip rounding onto the Saaty scale.
    #[arg(long)]
    pub no_round: bool,
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub workers: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReportArgs {
    /// Database written by `simulate msobe` (CSV or JSONL).
    pub database: PathBuf,
    #[arg(long, default_value = "ati")]
    pub index: IndexKind,
    #[arg(long, default_value = "ae_rev")]
    pub error: ErrorKind,
    #[arg(long, default_value_t = 15)]
    pub classes: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct AcceptArgs {
    pub pcm: PathBuf,
    #[arg(long, default_value = "rev")]
    pub method: Method,
    /// Largest acceptable value of the chosen error quantile.
    #[arg(long)]
    pub threshold: f64,
    #[arg(long, default_value = "q90")]
    pub quantile: QuantileChoice,
    /// Quantile table from `report --format csv`; built-in tables otherwise.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Run counts recorded next to the configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: Option<u64>,
    pub config: Command,
    pub counts: Counts,
}

impl Manifest {
    pub fn new(config: Command, seed: Option<u64>, counts: Counts) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config,
            counts,
        }
    }
}

/// `<out>.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}
