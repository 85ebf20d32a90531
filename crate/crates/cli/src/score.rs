use serde::Deserialize;

use easte::eval::{percent, score, EvalMode, ScoreMode, SentencePrediction};
use easte::Split;

use crate::config::{read_text, require, sibling, write_bytes, write_json, RunConfig};
use crate::predict::parse_regime;
use crate::{load_corpus, load_inventory, CliError};

#[derive(Deserialize)]
struct PredictionFile {
    predictions: Vec<SentencePrediction>,
}

pub fn cmd_score(mut config: RunConfig) -> Result<(), CliError> {
    let gold_path = require(&config.gold, "gold")?;
    let pred_path = require(&config.pred, "pred")?;
    let out = require(&config.out, "out")?;
    let csv_out = config.csv_out.get_or_insert_with(|| sibling(&out, ".csv")).clone();
    let mode_name = config.mode.get_or_insert_with(|| "easte".into()).clone();
    let mode = ScoreMode::parse(&mode_name).ok_or_else(|| {
        CliError::Usage(format!(
            "--mode must be easte, tasd, entity, aspect or sentiment, got {mode_name:?}"
        ))
    })?;
    let regime = parse_regime(&require(&config.regime, "regime")?)?;
    let eval_mode = EvalMode::new(mode, regime).map_err(|e| CliError::Usage(e.to_string()))?;

    let inventory = load_inventory(&config)?;
    let gold = load_corpus(&gold_path, Split::Test, &inventory)?;
    let file: PredictionFile = serde_json::from_str(&read_text(&pred_path)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", pred_path.display())))?;
    let report = score(&gold, &file.predictions, eval_mode).map_err(|e| CliError::Data(e.to_string()))?;

    let mut json = serde_json::to_value(&report).expect("report serializes");
    json["percent"] = serde_json::json!({
        "precision": percent(report.precision),
        "recall": percent(report.recall),
        "f1": percent(report.f1),
    });
    json["run_config"] = config.to_json();
    write_json(&out, &json)?;
    write_bytes(&csv_out, format!("{}{}", config.csv_comment(), report.csv()).as_bytes())?;
    println!("{}", report.summary_line());
    Ok(())
}
