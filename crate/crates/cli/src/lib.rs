//! The `codec` command line: ingest, train, index, search, eval,
//! oracle-check, bench, stats and gen-synthetic.

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

pub use config::RunConfig;
pub use output::{error_line, exit_code, ColorMode};

/// Bad flags, config keys or missing inputs. Maps to exit code 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(name = "codec", version, about = "Contextualized code search over a latent Gaussian model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Config file of `key = value` lines; flags override it
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seed for all randomness in this command
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Write the resolved configuration to FILE before running
    #[arg(long, value_name = "FILE")]
    pub save_config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse .mj sources (file or directory) or JSON lines into a canonical corpus
    Ingest(IngestArgs),
    /// Train the model on an ingested corpus and write a checkpoint
    Train(TrainArgs),
    /// Build a binary index of every corpus program
    Index(IndexArgs),
    /// Rank indexed programs for a query file containing one hole
    Search(SearchArgs),
    /// Score held-out retrieval tasks under all four matchers
    Eval(EvalArgs),
    /// Compare analytic ranking against the sampling estimator
    OracleCheck(OracleArgs),
    /// Measure analytic and sampling scan throughput
    Bench(BenchArgs),
    /// Print entry count, dimension and checksum of an index
    Stats(StatsArgs),
    /// Write the synthetic family corpus as .mj sources
    GenSynthetic(GenArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// A .mj file, a directory of .mj files, or a .jsonl corpus
    #[arg(value_name = "INPUT")]
    pub input: PathBuf,
    /// Output JSON-lines file (default: stdout)
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Id of the first record
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub first_id: u64,
    /// Keep evidence derived from each method's own body
    #[arg(long)]
    pub with_body: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Ingested JSON-lines corpus
    #[arg(long, value_name = "FILE")]
    pub corpus: Option<PathBuf>,
    /// Output checkpoint
    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,
    /// Per-step objective as CSV (`step,objective`)
    #[arg(long, value_name = "FILE")]
    pub metrics: Option<PathBuf>,
    /// Latent dimension
    #[arg(long, value_name = "N")]
    pub latent_dim: Option<usize>,
    /// Step size
    #[arg(long, value_name = "X")]
    pub learning_rate: Option<f64>,
    /// Number of updates
    #[arg(long, value_name = "N")]
    pub steps: Option<usize>,
    /// Examples per step, 0 for the full corpus
    #[arg(long, value_name = "N")]
    pub batch_size: Option<usize>,
    /// Latent draws per example per step
    #[arg(long, value_name = "N")]
    pub z_samples: Option<usize>,
    /// Update rule: sgd or adam
    #[arg(long, value_name = "NAME")]
    pub optimizer: Option<String>,
    /// Gradient norm cap
    #[arg(long, value_name = "X")]
    pub clip_norm: Option<f64>,
    /// Print the objective every N steps to stderr
    #[arg(long, value_name = "N", default_value_t = 100)]
    pub log_every: usize,
    /// Worker threads (default 1)
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    /// Ingested JSON-lines corpus
    #[arg(long, value_name = "FILE")]
    pub corpus: Option<PathBuf>,
    /// Trained checkpoint
    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,
    /// Output index file
    #[arg(long, value_name = "FILE")]
    pub index: Option<PathBuf>,
    /// Importance samples per entry for log P(Y)
    #[arg(long, value_name = "N")]
    pub mc_samples: Option<usize>,
    /// Worker threads (default: all cores)
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

/// Flags for commands that scan an index.
#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    /// Index file
    #[arg(long, value_name = "FILE")]
    pub index: Option<PathBuf>,
    /// Trained checkpoint
    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,
    /// Index shards scanned in parallel (default: one per thread)
    #[arg(long, value_name = "N")]
    pub shards: Option<usize>,
    /// Worker threads (default: all cores)
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// .mj file with exactly one `__CODE_SEARCH__` hole
    #[arg(value_name = "QUERY")]
    pub query: PathBuf,
    /// Number of results
    #[arg(short, long, value_name = "N")]
    pub k: Option<usize>,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[command(flatten)]
    pub scan: ScanArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Held-out classes (.mj file or directory) to draw tasks from
    #[arg(long, value_name = "PATH")]
    pub queries: Option<PathBuf>,
    /// Number of tasks, 0 for every eligible class
    #[arg(long, value_name = "N")]
    pub tasks: Option<usize>,
    /// Results inspected per task
    #[arg(long, value_name = "N")]
    pub depth: Option<usize>,
    /// Report as JSON (default: stdout)
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
    /// Headline metrics as CSV
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub scan: ScanArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Query files with one hole, or hole-free classes to draw tasks from
    #[arg(long, value_name = "PATH")]
    pub queries: Option<PathBuf>,
    /// Tasks drawn from hole-free classes, 0 for every eligible class
    #[arg(long, value_name = "N")]
    pub tasks: Option<usize>,
    /// Latent draws per query for the sampling estimator
    #[arg(long, value_name = "N")]
    pub mc_samples: Option<usize>,
    /// Top results compared per query
    #[arg(long, value_name = "N")]
    pub depth: Option<usize>,
    #[command(flatten)]
    pub scan: ScanArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Query file with one hole, or classes to draw one task from
    #[arg(long, value_name = "PATH")]
    pub queries: Option<PathBuf>,
    /// Timed analytic passes
    #[arg(long, value_name = "N", default_value_t = 3)]
    pub repeats: usize,
    /// Latent draws for the sampling baseline
    #[arg(long, value_name = "N")]
    pub mc_samples: Option<usize>,
    /// Entries scored by the sampling baseline
    #[arg(long, value_name = "N", default_value_t = 2000)]
    pub mc_entries: usize,
    /// Results kept per scan
    #[arg(short, long, value_name = "N")]
    pub k: Option<usize>,
    #[command(flatten)]
    pub scan: ScanArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Index file
    #[arg(long, value_name = "FILE")]
    pub index: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Output directory; receives train.mj and held_out.mj
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Number of program families
    #[arg(long, value_name = "N", default_value_t = 8)]
    pub families: usize,
    /// Classes generated per family
    #[arg(long, value_name = "N", default_value_t = 200)]
    pub per_family: usize,
    /// Per-site perturbation rate in [0, 1]
    #[arg(long, value_name = "X", default_value_t = 0.1)]
    pub noise: f64,
    #[command(flatten)]
    pub common: Common,
}

/// The `clap` command with the color choice applied.
pub fn command(color: ColorMode) -> clap::Command {
    Cli::command().color(color.clap())
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code; errors are reported as one JSON line on stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let color = ColorMode::from_env();
    let matches = match command(color).try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => return output::report_clap(e),
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => return output::report_clap(e),
    };
    match commands::dispatch(cli.command, color) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            exit_code(&e)
        }
    }
}
