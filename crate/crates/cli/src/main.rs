use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod io;

/// Exit codes: 0 success, 1 usage error, 2 data error.
const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "leadsum", version, about = "Multi-document lead summarization pipeline")]
pub struct Cli {
    /// JSON file with pipeline defaults; flags and LEADSUM_* variables override it.
    #[arg(long, global = true, env = "LEADSUM_CONFIG")]
    pub config: Option<PathBuf>,

    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "LEADSUM_JOBS")]
    pub jobs: Option<usize>,

    /// Skip malformed input lines with a warning instead of failing.
    #[arg(long, global = true)]
    pub skip_malformed: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Match corpus documents to wiki titles and filter the candidates.
    BuildDataset(BuildDatasetArgs),
    /// Percentile table of input size, output size and document count.
    Stats(StatsArgs),
    /// Run an extractive stage over a dataset.
    Extract(ExtractArgs),
    /// Score predictions against targets with ROUGE-1/2/L.
    Rouge(RougeArgs),
    /// Compare the random, TF-IDF and cheating extractors with bootstrap intervals.
    Experiment(ExperimentArgs),
    /// ROUGE-2 recall of an extractor for several values of L.
    SweepL(SweepArgs),
    /// Truncate extracts and run them through an external abstractive model.
    AbstractiveRun(AbstractiveArgs),
}

#[derive(Debug, Args)]
pub struct BuildDatasetArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub wiki: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, env = "LEADSUM_MAX_DOCS")]
    pub max_docs: Option<usize>,
    #[arg(long, env = "LEADSUM_MIN_INPUT_WORDS")]
    pub min_input_words: Option<usize>,
    #[arg(long, env = "LEADSUM_MIN_SUMMARY_WORDS")]
    pub min_summary_words: Option<usize>,
    #[arg(long, env = "LEADSUM_CLONE_THRESHOLD")]
    pub clone_threshold: Option<f64>,
    /// Also write train/validation/test files (80/10/10) into this directory.
    #[arg(long)]
    pub split_dir: Option<PathBuf>,
    #[arg(long, env = "LEADSUM_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Write the JSON report here (the text table always goes to stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the JSON report to stdout instead of the text table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_parser = ["tfidf", "random", "cheating"])]
    pub extractor: String,
    #[arg(short = 'L', value_name = "L", env = "LEADSUM_L")]
    pub l: Option<usize>,
    #[arg(long, env = "LEADSUM_SEED")]
    pub seed: Option<u64>,
    #[arg(long, env = "LEADSUM_TARGET_WORDS")]
    pub target_words: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RougeArgs {
    #[arg(long)]
    pub predictions: PathBuf,
    #[arg(long)]
    pub targets: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(short = 'L', value_name = "L", env = "LEADSUM_L")]
    pub l: Option<usize>,
    #[arg(long, env = "LEADSUM_SEED")]
    pub seed: Option<u64>,
    #[arg(long, env = "LEADSUM_N_RESAMPLES")]
    pub n_resamples: Option<usize>,
    #[arg(long, env = "LEADSUM_TARGET_WORDS")]
    pub target_words: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_parser = ["tfidf", "random", "cheating"], default_value = "tfidf")]
    pub extractor: String,
    #[arg(long, value_delimiter = ',', default_value = "0,2,4,6,8,10,12,14,16,18")]
    pub l_values: Vec<usize>,
    #[arg(long, env = "LEADSUM_SEED")]
    pub seed: Option<u64>,
    #[arg(long, env = "LEADSUM_TARGET_WORDS")]
    pub target_words: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AbstractiveArgs {
    /// Output of `extract`.
    #[arg(long)]
    pub extracts: PathBuf,
    /// Model program and arguments, shell-quoted.
    #[arg(long, env = "LEADSUM_COMMAND")]
    pub command: Option<String>,
    #[arg(short = 'J', long = "max-input-tokens", env = "LEADSUM_J")]
    pub j: Option<usize>,
    #[arg(long, env = "LEADSUM_K_MAX")]
    pub k_max: Option<usize>,
    #[arg(long, env = "LEADSUM_K_MIN")]
    pub k_min: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Failure class, mapped onto the exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

impl From<leadsum_core::Error> for Failure {
    fn from(e: leadsum_core::Error) -> Self {
        Failure::Data(e.into())
    }
}

fn init_logging() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LEADSUM_LOG", "info"))
        .format(|buf, record| writeln!(buf, "[{}] {}", record.level(), record.args()))
        .init();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    init_logging();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("[ERROR] {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Data(e)) => {
            eprintln!("[ERROR] {e:#}");
            ExitCode::from(EXIT_DATA)
        }
    }
}
