use std::path::Path;

use easte::model::{save_checkpoint, train, Context, EpochLoss, ModelError, ModelSpec, TrainConfig, DEFAULT_EMBED_DIM};
use easte::Split;

use crate::config::{existing, require, sibling, write_bytes, RunConfig};
use crate::{load_corpus, load_inventory, CliError};

fn parse_context(name: &str) -> Result<Context, CliError> {
    match name {
        "self-attention" => Ok(Context::SelfAttention),
        "bag" => Ok(Context::Bag),
        other => Err(CliError::Usage(format!(
            "--context must be self-attention or bag, got {other:?}"
        ))),
    }
}

fn history_csv(config: &RunConfig, history: &[EpochLoss]) -> String {
    let mut csv = config.csv_comment();
    csv.push_str("epoch,joint,entity,aspect,sentiment\n");
    for h in history {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            h.epoch, h.joint, h.entity, h.aspect, h.sentiment
        ));
    }
    csv
}

pub fn cmd_train(mut config: RunConfig) -> Result<(), CliError> {
    let corpus_path = require(&config.corpus, "corpus")?;
    let checkpoint_out = require(&config.checkpoint_out, "checkpoint-out")?;
    let history_out = config
        .history_out
        .get_or_insert_with(|| sibling(&checkpoint_out, ".history.csv"))
        .clone();
    let seed = *config.seed.get_or_insert(0);
    let tconfig = TrainConfig {
        epochs: *config.epochs.get_or_insert(50),
        learning_rate: *config.lr.get_or_insert(1e-3),
        batch_size: *config.batch.get_or_insert(1),
        shuffle_seed: seed,
    };
    let spec = ModelSpec {
        embed_dim: *config.embed_dim.get_or_insert(DEFAULT_EMBED_DIM),
        context: parse_context(config.context.get_or_insert_with(|| "self-attention".into()))?,
        seed,
    };
    tconfig.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    existing(&corpus_path)?;
    let inventory = load_inventory(&config)?;
    let corpus = load_corpus(&corpus_path, Split::Train, &inventory)?;

    let outcome = match train(&corpus, spec, &tconfig) {
        Ok(outcome) => outcome,
        Err(ModelError::Numeric { tensor, epoch, step, history }) => {
            write_bytes(&history_out, history_csv(&config, &history).as_bytes())?;
            return Err(CliError::Data(format!(
                "training diverged: non-finite {tensor} at epoch {epoch}, step {step}; history kept in {}",
                history_out.display()
            )));
        }
        Err(e @ ModelError::Config(_)) => return Err(CliError::Usage(e.to_string())),
        Err(e) => return Err(CliError::Data(e.to_string())),
    };
    write_checkpoint(&checkpoint_out, &outcome.tagger, &config)?;
    write_bytes(&history_out, history_csv(&config, &outcome.history).as_bytes())?;
    let last = outcome.history.last().expect("at least one epoch");
    println!(
        "trained {} epochs on {} sentences; final joint loss {:.6}",
        outcome.history.len(),
        corpus.len(),
        last.joint
    );
    Ok(())
}

fn write_checkpoint(path: &Path, tagger: &easte::model::Tagger, config: &RunConfig) -> Result<(), CliError> {
    let mut buf = Vec::new();
    save_checkpoint(tagger, &serde_json::json!({ "run_config": config.to_json() }), &mut buf)
        .map_err(|e| CliError::Io(e.to_string()))?;
    write_bytes(path, &buf)
}
