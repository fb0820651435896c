//! `v2r` command line: generation, evaluation, scoring and diagnostics.

mod analyze;
mod eval;
mod gen;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::model::{RunConfig, Task};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_ENDPOINT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "v2r", version, about = "Visual-variation robustness benchmarks for vision-language models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render variant images and synthetic tasks and write the manifest.
    Gen(GenArgs),
    /// Query an endpoint for every manifest record.
    Eval(EvalArgs),
    /// Score outputs against the manifest and write the report.
    Score(ScoreArgs),
    /// Decode exported features into top-k vocabulary tokens.
    Decode(DecodeArgs),
    /// Train a linear probe on exported features.
    Probe(ProbeArgs),
    /// Image/caption alignment gap, cluster statistics and a 2-D projection.
    Alignment(AlignmentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// The published campaign sizes.
    Paper,
    /// A few samples per setting, for quick checks.
    Smoke,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Tasks to generate; repeat or comma-separate.
    #[arg(long = "task", value_delimiter = ',', required = true)]
    pub tasks: Vec<Task>,
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Side of the anchor grid.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Synthetic-task campaign sizes; overrides the config's campaign table.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Asset root with `<task>/<label>/<name>.png`; built-in placeholders otherwise.
    #[arg(long)]
    pub assets: Option<PathBuf>,
    /// Background root with `images/*.png`, usable as `image/<stem>` contexts.
    #[arg(long)]
    pub backgrounds: Option<PathBuf>,
    /// Output directory; the manifest goes to `<out>/manifest.jsonl`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Outputs file (JSON lines).
    #[arg(long)]
    pub out: PathBuf,
    /// Endpoint configuration (TOML); flags below override it.
    #[arg(long)]
    pub endpoint: Option<PathBuf>,
    #[arg(long)]
    pub base_url: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    /// Environment variable holding the API token.
    #[arg(long)]
    pub auth_env: Option<String>,
    /// Send no authorization header.
    #[arg(long, conflicts_with = "auth_env")]
    pub no_auth: bool,
    #[arg(long)]
    pub in_flight: Option<usize>,
    #[arg(long)]
    pub max_attempts: Option<u32>,
    /// Response cache (JSON lines), read and appended.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Run configuration supplying the category classes and matrix words.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Prompt table (TOML) replacing the bundled one.
    #[arg(long)]
    pub prompts: Option<PathBuf>,
    /// Synonym table (TOML) replacing the bundled one.
    #[arg(long)]
    pub synonyms: Option<PathBuf>,
    /// Exit with status 4 when more than this fraction of records failed.
    #[arg(long, default_value_t = 0.5)]
    pub max_failure_rate: f64,
    /// Answer every request with this text instead of calling an endpoint.
    #[arg(long, conflicts_with_all = ["endpoint", "base_url"])]
    pub mock: Option<String>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Outputs files; several models may be scored together.
    #[arg(long = "outputs", required = true)]
    pub outputs: Vec<PathBuf>,
    /// Run configuration supplying the aggregation weights.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Feature rows to decode (VMAT).
    #[arg(long)]
    pub features: PathBuf,
    /// Token embedding matrix (VMAT), one row per vocabulary entry.
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Vocabulary, one token per line.
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long, default_value_t = crate::diagnostics::DEFAULT_TOP_K)]
    pub top_k: usize,
    /// CSV table of `feature,rank,index,token,probability`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// One label per feature row.
    #[arg(long)]
    pub labels: PathBuf,
    /// Held-out features; accuracy is reported on the training set otherwise.
    #[arg(long, requires = "test_labels")]
    pub test_features: Option<PathBuf>,
    #[arg(long, requires = "test_features")]
    pub test_labels: Option<PathBuf>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// JSON with the trained probe and its accuracy.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AlignmentArgs {
    /// Image-side features (VMAT).
    #[arg(long)]
    pub image_features: PathBuf,
    /// Caption-side features, row-aligned with the image features.
    #[arg(long)]
    pub caption_features: Option<PathBuf>,
    /// One label per image feature row, for cluster statistics.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Output directory for `alignment.json` and `projection.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Endpoint(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Endpoint(_) => EXIT_ENDPOINT,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn io(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

fn load_config(path: Option<&PathBuf>) -> Result<RunConfig, CliError> {
    use crate::model::ConfigError;
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => RunConfig::load(p).map_err(|e| match e {
            ConfigError::Io { .. } => io(e),
            _ => usage(e),
        }),
    }
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(a) => gen::run(a),
        Command::Eval(a) => eval::run(a),
        Command::Score(a) => analyze::score(a),
        Command::Decode(a) => analyze::decode(a),
        Command::Probe(a) => analyze::probe(a),
        Command::Alignment(a) => analyze::alignment(a),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
