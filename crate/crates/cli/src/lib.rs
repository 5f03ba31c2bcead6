//! `diversample` command-line front end.
//!
//! Every command writes its primary output plus a `<output>.run.json`
//! manifest (arguments, normalizer fingerprint, seeds, input digests).
//! Settings come from flags, then from the `--config` file, then defaults.

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use diversample_core::{Error, ErrorKind};

mod commands;
mod manifest;
mod settings;

pub use manifest::{InputDigest, RunManifest};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_INPUT: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "diversample",
    version,
    about = "Corpus diversity measurement and diversity-driven sampling"
)]
pub struct Cli {
    /// Worker threads; outputs do not depend on it [default: available cores]
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Flat `key = value` settings file; flags take precedence
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Skip malformed records instead of aborting
    #[arg(long, global = true)]
    pub lenient: bool,

    /// More log output (repeatable)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalize a JSONL corpus and write its token count table
    Tokenize(TokenizeArgs),
    /// Rényi entropy profile of a count table
    Entropy(EntropyArgs),
    /// Diversity-driven greedy document selection
    Sample(SampleArgs),
    /// Seeded random selections, normality and σ-distance
    Baseline(BaselineArgs),
    /// Complete-subtree count table of a CoNLL-U treebank
    Syntax(SyntaxArgs),
    /// Per-α lexical/syntactic correlation across treebank blocks
    Correlate(CorrelateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Tokenize(_) => "tokenize",
            Command::Entropy(_) => "entropy",
            Command::Sample(_) => "sample",
            Command::Baseline(_) => "baseline",
            Command::Syntax(_) => "syntax",
            Command::Correlate(_) => "correlate",
        }
    }
}

#[derive(Debug, Args)]
pub struct TokenizeArgs {
    /// JSONL corpus (`id`, `text` per line)
    #[arg(long)]
    pub input: PathBuf,
    /// Count table TSV
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    /// Count table TSV
    #[arg(long)]
    pub input: PathBuf,
    /// Profile CSV (`alpha,entropy`)
    #[arg(long)]
    pub output: PathBuf,
    /// Comma-separated orders; overrides the grid
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// Grid upper bound [default: 5]
    #[arg(long)]
    pub alpha_max: Option<f64>,
    /// Grid step [default: 0.1]
    #[arg(long)]
    pub alpha_step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SelectionArgs {
    /// JSONL candidate pool
    #[arg(long)]
    pub candidates: PathBuf,
    /// Count table of the corpus being extended [default: empty]
    #[arg(long)]
    pub initial: Option<PathBuf>,
    /// Target size S in normalized tokens, initial corpus included
    #[arg(long)]
    pub target_tokens: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub selection: SelectionArgs,
    /// Strictly decreasing exhaustivity levels [default: 1000,100,10,1]
    #[arg(long, value_delimiter = ',')]
    pub exhaustivity: Option<Vec<usize>>,
    /// Shuffle the candidate stream with this seed before scanning
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sample manifest: selected ids plus a `#` comment block
    #[arg(long)]
    pub output: PathBuf,
    /// Trajectory CSV [default: <output>.trajectory.csv]
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub selection: SelectionArgs,
    /// First seed; runs use seed, seed+1, ...
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of seeded runs [default: 20]
    #[arg(long)]
    pub runs: Option<usize>,
    /// Baseline CSV (`seed,entropy` plus summary footer)
    #[arg(long)]
    pub output: PathBuf,
    /// Entropy to test against the baseline
    #[arg(long, conflicts_with = "against_manifest")]
    pub against_value: Option<f64>,
    /// Sample manifest whose final entropy is tested against the baseline
    #[arg(long)]
    pub against_manifest: Option<PathBuf>,
    /// Significance CSV [default: <output>.significance.csv]
    #[arg(long)]
    pub significance: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TreebankArgs {
    /// CoNLL-U treebank
    #[arg(long)]
    pub input: PathBuf,
    /// `xpos` or `upos` [default: xpos]
    #[arg(long)]
    pub pos_column: Option<String>,
}

#[derive(Debug, Args)]
pub struct SyntaxArgs {
    #[command(flatten)]
    pub treebank: TreebankArgs,
    /// Count table TSV
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub treebank: TreebankArgs,
    /// Sentences per block
    #[arg(long)]
    pub block_size: Option<usize>,
    /// Grid upper bound [default: 5]
    #[arg(long)]
    pub alpha_max: Option<f64>,
    /// Grid step [default: 0.1]
    #[arg(long)]
    pub alpha_step: Option<f64>,
    /// Keep the trailing partial block in the correlation
    #[arg(long)]
    pub include_partial: bool,
    /// CLSD CSV (`alpha,pearson,spearman,n_blocks`)
    #[arg(long)]
    pub output: PathBuf,
    /// Optional per-block profile CSV
    #[arg(long)]
    pub profiles: Option<PathBuf>,
}

/// Failure of a command, mapped onto exit codes.
#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Internal(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e.kind() {
                ErrorKind::Config => EXIT_CONFIG,
                ErrorKind::Input | ErrorKind::Domain => EXIT_INPUT,
            },
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    init_logging(cli.verbose);
    // the program path is machine-specific; record the tool name instead
    let argv: Vec<String> = std::iter::once("diversample".to_string())
        .chain(
            argv.iter()
                .skip(1)
                .map(|a| a.to_string_lossy().into_owned()),
        )
        .collect();
    match commands::dispatch(&cli, &argv) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("diversample {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .try_init();
}
