use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "cascade-lens", version, about = "Burstiness, activity cascades and churn in co-editing networks")]
pub struct Cli {
    /// Worker threads (default: one per core).
    #[arg(long, global = true, env = "CASCADE_LENS_JOBS")]
    pub jobs: Option<usize>,

    /// Shape of the summary printed on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv, env = "CASCADE_LENS_FORMAT")]
    pub format: Format,

    /// More log output on stderr; repeat for debug.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Extract commits.csv and coedits.csv from a git repository.
    Mine(MineArgs),
    /// Project and per-developer burstiness with a commit-shuffle baseline.
    Burstiness(BurstinessArgs),
    /// Detect cascade chains started by the most active developers.
    Cascades(CascadeArgs),
    /// Permutation test of the cascade count against co-edit time shuffles.
    Validate(ValidateArgs),
    /// Generate a random or planted-cascade ground-truth network.
    Synth(SynthArgs),
    /// Leave-one-repository-out churn prediction.
    Churn(ChurnArgs),
    /// Merge validation.json files into one table.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EventInput {
    #[arg(long, env = "CASCADE_LENS_COMMITS")]
    pub commits: PathBuf,
    #[arg(long, env = "CASCADE_LENS_COEDITS")]
    pub coedits: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Detection {
    /// Share of committers, by commit count, allowed to start a cascade.
    #[arg(long, default_value_t = 0.2, env = "CASCADE_LENS_TOP_FRACTION")]
    pub top_fraction: f64,
    /// Percentile rank at or below which a response counts as a trigger.
    #[arg(long, default_value_t = 25.0, env = "CASCADE_LENS_THRESHOLD")]
    pub threshold: f64,
    /// Rank ties count as greater, not half.
    #[arg(long)]
    pub strict_rank: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Output {
    /// Directory for the output files; created if missing.
    #[arg(long, default_value = ".", env = "CASCADE_LENS_OUT")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct MineArgs {
    #[arg(long)]
    pub repo: PathBuf,
    #[arg(long, default_value = "HEAD")]
    pub branch: String,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Args, Serialize)]
pub struct BurstinessArgs {
    #[arg(long, env = "CASCADE_LENS_COMMITS")]
    pub commits: PathBuf,
    /// Only used to register developers that never commit.
    #[arg(long, env = "CASCADE_LENS_COEDITS")]
    pub coedits: Option<PathBuf>,
    #[arg(long, default_value_t = 3, env = "CASCADE_LENS_MIN_COMMITS")]
    pub min_commits: usize,
    #[arg(long, default_value_t = 100, env = "CASCADE_LENS_SHUFFLES")]
    pub shuffles: usize,
    #[arg(long, default_value_t = 42, env = "CASCADE_LENS_SEED")]
    pub seed: u64,
    /// Individual values are reported for this share of top committers.
    #[arg(long, default_value_t = 0.2, env = "CASCADE_LENS_TOP_FRACTION")]
    pub top_fraction: f64,
    /// Report every developer, ignoring --top-fraction.
    #[arg(long)]
    pub all_developers: bool,
    /// Use the n-1 standard deviation.
    #[arg(long)]
    pub sample_std: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Args, Serialize)]
pub struct CascadeArgs {
    #[command(flatten)]
    pub input: EventInput,
    #[command(flatten)]
    pub detection: Detection,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub input: EventInput,
    #[command(flatten)]
    pub detection: Detection,
    #[arg(long, default_value_t = 100, env = "CASCADE_LENS_SHUFFLES")]
    pub shuffles: usize,
    #[arg(long, default_value_t = 42, env = "CASCADE_LENS_SEED")]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthKind {
    Random,
    Cascade,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(value_enum)]
    pub kind: SynthKind,
    /// Used verbatim as the generator seed.
    #[arg(long, default_value_t = 42, env = "CASCADE_LENS_SEED")]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub developers: usize,
    #[arg(long, default_value_t = 10_000_000)]
    pub horizon: i64,
    /// Commits per developer (random network).
    #[arg(long, default_value_t = 100)]
    pub commits_per_dev: usize,
    /// Random co-edits (all edges of the random network, noise otherwise).
    #[arg(long, default_value_t = 100)]
    pub random_coedits: usize,
    #[arg(long, default_value_t = 10)]
    pub chains: usize,
    #[arg(long, default_value_t = 6)]
    pub chain_length: usize,
    #[arg(long, default_value_t = 100_000.0)]
    pub base_period: f64,
    #[arg(long, default_value_t = 0.1)]
    pub period_jitter: f64,
    #[arg(long, default_value_t = 3)]
    pub session_commits: usize,
    #[arg(long, default_value_t = 1800)]
    pub session_gap: i64,
    #[arg(long, default_value_t = 10)]
    pub lead_time: i64,
    #[arg(long, default_value_t = 0.2)]
    pub initiator_fraction: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionArg {
    Directed,
    Undirected,
    Both,
}

#[derive(Debug, Args, Serialize)]
pub struct ChurnArgs {
    /// Directory holding commits.csv and coedits.csv; repeat per repository.
    #[arg(long = "repo", required = true)]
    pub repos: Vec<PathBuf>,
    #[arg(long, default_value_t = 12, env = "CASCADE_LENS_WINDOW_MONTHS")]
    pub window_months: u32,
    /// Look-ahead for the churn label; defaults to the window length.
    #[arg(long, env = "CASCADE_LENS_HORIZON_MONTHS")]
    pub horizon_months: Option<u32>,
    #[arg(long, value_enum, default_value_t = ProjectionArg::Both, env = "CASCADE_LENS_PROJECTION")]
    pub projection: ProjectionArg,
    /// Independent oversampling runs per held-out repository.
    #[arg(long, default_value_t = 5)]
    pub runs: usize,
    #[arg(long, default_value_t = 5)]
    pub neighbors: usize,
    #[arg(long, default_value_t = 1.0)]
    pub l2: f64,
    #[arg(long, default_value_t = 42, env = "CASCADE_LENS_SEED")]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    /// validation.json file, or directory searched recursively for them.
    #[arg(long = "in", required = true)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}
