//! `easte` command line: parse corpora, train the tagger, render prompts,
//! collect predictions and score them.
//!
//! Exit codes: 0 success, 1 data error, 2 usage or configuration error,
//! 3 partial failure (some sentences could not be predicted).

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub mod config;
mod parse;
mod predict;
mod prompt;
mod score;
mod train;

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Partial(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Data(_) | CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Partial(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "easte", version, about = "Entity-aspect sentiment triplet extraction toolkit")]
struct Cli {
    /// TOML file with default values for any flag (snake_case keys).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert SemEval XML to canonical JSON lines and print statistics.
    Parse(ParseArgs),
    /// Train the three-head token tagger.
    Train(TrainArgs),
    /// Predict quads with a checkpoint or from prompted completions.
    Predict(PredictArgs),
    /// Score predictions against gold.
    Score(ScoreArgs),
    /// Print a rendered prompt.
    Prompt(PromptArgs),
}

#[derive(Debug, Args)]
struct ParseArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// JSON label inventory (defaults to the restaurant inventory).
    #[arg(long)]
    inventory: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// train or test.
    #[arg(long)]
    split: Option<String>,
    /// Statistics JSON (default: <out>.stats.json).
    #[arg(long)]
    stats_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Canonical JSON-lines corpus.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    inventory: Option<PathBuf>,
    /// Default 50.
    #[arg(long)]
    epochs: Option<usize>,
    /// Default 1e-3.
    #[arg(long)]
    lr: Option<f64>,
    /// Default 1.
    #[arg(long)]
    batch: Option<usize>,
    /// Seeds both initialisation and shuffling. Default 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Default 64.
    #[arg(long)]
    embed_dim: Option<usize>,
    /// self-attention (default) or bag.
    #[arg(long)]
    context: Option<String>,
    #[arg(long)]
    checkpoint_out: Option<PathBuf>,
    /// Loss history CSV (default: <checkpoint-out>.history.csv).
    #[arg(long)]
    history_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Canonical JSON-lines corpus; only ids and texts are used.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    inventory: Option<PathBuf>,
    /// token (needs --checkpoint) or generative (needs --template).
    #[arg(long)]
    regime: Option<String>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// flan, llama2, llama3 or mixtral.
    #[arg(long)]
    template: Option<String>,
    /// Default 0.
    #[arg(long)]
    shots: Option<usize>,
    /// Canonical corpus to draw exemplars from (default: built-in examples).
    #[arg(long)]
    pool: Option<PathBuf>,
    /// Directory of `<sha256>.txt` completions.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// TOML endpoint description; the token is read from its `token_env`.
    #[arg(long)]
    endpoint_config: Option<PathBuf>,
    /// Completion log (default: <out>.runlog.jsonl).
    #[arg(long)]
    run_log: Option<PathBuf>,
    /// Concurrent completion requests. Default 4.
    #[arg(long)]
    max_inflight: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    gold: Option<PathBuf>,
    #[arg(long)]
    inventory: Option<PathBuf>,
    /// Predictions JSON written by `predict`.
    #[arg(long)]
    pred: Option<PathBuf>,
    /// easte, tasd, entity, aspect or sentiment.
    #[arg(long)]
    mode: Option<String>,
    /// token or generative.
    #[arg(long)]
    regime: Option<String>,
    /// Report JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Summary CSV (default: <out>.csv).
    #[arg(long)]
    csv_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PromptArgs {
    #[arg(long)]
    template: Option<String>,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    pool: Option<PathBuf>,
    #[arg(long)]
    sentence: Option<String>,
}

impl Command {
    fn into_config(self) -> RunConfig {
        let d = RunConfig::default();
        match self {
            Command::Parse(a) => RunConfig {
                command: Some("parse".into()),
                input: a.input,
                inventory: a.inventory,
                out: a.out,
                split: a.split,
                stats_out: a.stats_out,
                ..d
            },
            Command::Train(a) => RunConfig {
                command: Some("train".into()),
                corpus: a.corpus,
                inventory: a.inventory,
                epochs: a.epochs,
                lr: a.lr,
                batch: a.batch,
                seed: a.seed,
                embed_dim: a.embed_dim,
                context: a.context,
                checkpoint_out: a.checkpoint_out,
                history_out: a.history_out,
                ..d
            },
            Command::Predict(a) => RunConfig {
                command: Some("predict".into()),
                corpus: a.corpus,
                inventory: a.inventory,
                regime: a.regime,
                checkpoint: a.checkpoint,
                template: a.template,
                shots: a.shots,
                pool: a.pool,
                fixtures: a.fixtures,
                endpoint_config: a.endpoint_config,
                run_log: a.run_log,
                max_inflight: a.max_inflight,
                out: a.out,
                ..d
            },
            Command::Score(a) => RunConfig {
                command: Some("score".into()),
                gold: a.gold,
                inventory: a.inventory,
                pred: a.pred,
                mode: a.mode,
                regime: a.regime,
                out: a.out,
                csv_out: a.csv_out,
                ..d
            },
            Command::Prompt(a) => RunConfig {
                command: Some("prompt".into()),
                template: a.template,
                shots: a.shots,
                pool: a.pool,
                sentence: a.sentence,
                ..d
            },
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let mut config = cli.command.into_config();
    if let Some(path) = &cli.config {
        let file = RunConfig::from_file(path)?;
        let command = config.command.take();
        config = config.or(file);
        config.command = command;
    }
    match config.command.as_deref() {
        Some("parse") => parse::cmd_parse(config),
        Some("train") => train::cmd_train(config),
        Some("predict") => predict::cmd_predict(config),
        Some("score") => score::cmd_score(config),
        Some("prompt") => prompt::cmd_prompt(config),
        other => unreachable!("unknown command {other:?}"),
    }
}

fn load_inventory(config: &RunConfig) -> Result<easte::LabelInventory, CliError> {
    match &config.inventory {
        None => Ok(easte::LabelInventory::default()),
        Some(path) => easte::LabelInventory::from_json(&config::read_bytes(path)?)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display()))),
    }
}

fn load_corpus(
    path: &std::path::Path,
    split: easte::Split,
    inventory: &easte::LabelInventory,
) -> Result<easte::Corpus, CliError> {
    let bytes = config::read_bytes(path)?;
    easte::corpus::parse_canonical(&bytes, split, inventory)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn parse_split(name: &str) -> Result<easte::Split, CliError> {
    match name {
        "train" => Ok(easte::Split::Train),
        "test" => Ok(easte::Split::Test),
        other => Err(CliError::Usage(format!("--split must be train or test, got {other:?}"))),
    }
}
