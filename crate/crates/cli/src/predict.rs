use rayon::prelude::*;
use serde::Serialize;

use easte::eval::{PredQuad, Regime};
use easte::model::{load_checkpoint, predict_with_spans, Tagger};
use easte::prompting::{
    exemplars_from_corpus, parse_colon_format, parse_json_triplet, render_prompt, Completer, Diagnostic,
    EndpointConfig, PromptTemplate, RunLog, TemplateId,
};
use easte::{Corpus, LabelInventory, ReviewSentence, Split};

use crate::config::{existing, read_bytes, read_text, require, sibling, write_json, RunConfig};
use crate::{load_corpus, load_inventory, CliError};

#[derive(Debug, Serialize)]
struct Prediction {
    id: String,
    quads: Vec<PredQuad>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    diagnostics: Vec<Diagnostic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    raw_text: Option<String>,
}

#[derive(Debug, Serialize)]
struct Failure {
    id: String,
    message: String,
}

type Outcome = Result<Prediction, Failure>;

pub fn parse_regime(name: &str) -> Result<Regime, CliError> {
    Regime::parse(name)
        .ok_or_else(|| CliError::Usage(format!("--regime must be token or generative, got {name:?}")))
}

pub fn cmd_predict(mut config: RunConfig) -> Result<(), CliError> {
    let corpus_path = require(&config.corpus, "corpus")?;
    let out = require(&config.out, "out")?;
    if config.regime.is_none() {
        config.regime = match (&config.checkpoint, &config.template) {
            (Some(_), None) => Some("token".into()),
            (None, Some(_)) => Some("generative".into()),
            _ => None,
        };
    }
    let regime = parse_regime(&require(&config.regime, "regime")?)?;
    let inventory = load_inventory(&config)?;
    existing(&corpus_path)?;

    let outcomes: Vec<Outcome> = match regime {
        Regime::Token => {
            let path = require(&config.checkpoint, "checkpoint")?;
            let (tagger, _) = load_checkpoint(read_bytes(&path)?.as_slice())
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            let corpus = load_corpus(&corpus_path, Split::Test, &inventory)?;
            corpus.sentences.iter().map(|s| token_prediction(&tagger, s)).collect()
        }
        Regime::Generative => generative(&mut config, &corpus_path, &out, &inventory)?,
    };

    let mut predictions = Vec::new();
    let mut errors = Vec::new();
    for o in outcomes {
        match o {
            Ok(p) => predictions.push(p),
            Err(f) => errors.push(f),
        }
    }
    predictions.sort_by(|a, b| a.id.cmp(&b.id));
    errors.sort_by(|a, b| a.id.cmp(&b.id));
    write_json(
        &out,
        &serde_json::json!({
            "run_config": config.to_json(),
            "predictions": predictions,
            "errors": errors,
        }),
    )?;
    println!("{} predicted, {} failed", predictions.len(), errors.len());
    if errors.is_empty() {
        Ok(())
    } else {
        for f in &errors {
            eprintln!("{}: {}", f.id, f.message);
        }
        Err(CliError::Partial(format!("{} sentence(s) failed", errors.len())))
    }
}

fn token_prediction(tagger: &Tagger, sentence: &ReviewSentence) -> Outcome {
    match predict_with_spans(tagger, &sentence.text) {
        Ok(decoded) => Ok(Prediction {
            id: sentence.id.clone(),
            quads: decoded
                .into_iter()
                .map(|d| PredQuad {
                    quad: d.quad,
                    tokens: d.tokens,
                })
                .collect(),
            diagnostics: Vec::new(),
            raw_text: None,
        }),
        Err(e) => Err(Failure {
            id: sentence.id.clone(),
            message: e.to_string(),
        }),
    }
}

fn generative(
    config: &mut RunConfig,
    corpus_path: &std::path::Path,
    out: &std::path::Path,
    inventory: &LabelInventory,
) -> Result<Vec<Outcome>, CliError> {
    let template = template_from(config, inventory)?;
    let max_inflight = *config.max_inflight.get_or_insert(4);
    if max_inflight == 0 {
        return Err(CliError::Usage("--max-inflight must be at least 1".into()));
    }
    let completer = match (&config.fixtures, &config.endpoint_config) {
        (Some(dir), None) => {
            Completer::fixtures(existing(dir)?).map_err(|e| CliError::Usage(e.to_string()))?
        }
        (None, Some(path)) => {
            let endpoint = EndpointConfig::from_toml(&read_text(path)?)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            Completer::endpoint(endpoint).map_err(|e| CliError::Usage(e.to_string()))?
        }
        _ => {
            return Err(CliError::Usage(
                "generative prediction needs exactly one of --fixtures and --endpoint-config".into(),
            ))
        }
    };
    let log_path = config
        .run_log
        .get_or_insert_with(|| sibling(out, ".runlog.jsonl"))
        .clone();
    let completer = completer.with_log(RunLog::append_to(&log_path).map_err(|e| CliError::Io(e.to_string()))?);
    let corpus = load_corpus(corpus_path, Split::Test, inventory)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(max_inflight)
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    Ok(pool.install(|| {
        corpus
            .sentences
            .par_iter()
            .map(|s| {
                let prompt = render_prompt(&template, &s.text);
                let completion = completer.complete(&prompt).map_err(|e| Failure {
                    id: s.id.clone(),
                    message: e.to_string(),
                })?;
                let parsed = if template.id.colon_format() {
                    parse_colon_format(&completion.raw_text, inventory)
                } else {
                    parse_json_triplet(&completion.raw_text, inventory)
                };
                Ok(Prediction {
                    id: s.id.clone(),
                    quads: parsed.quads.into_iter().map(PredQuad::from).collect(),
                    diagnostics: parsed.diagnostics,
                    raw_text: Some(completion.raw_text),
                })
            })
            .collect()
    }))
}

/// The prompt template described by `template`, `shots` and `pool`.
pub fn template_from(config: &mut RunConfig, inventory: &LabelInventory) -> Result<PromptTemplate, CliError> {
    let name = require(&config.template, "template")?;
    let id = TemplateId::parse(&name).ok_or_else(|| {
        CliError::Usage(format!("--template must be flan, llama2, llama3 or mixtral, got {name:?}"))
    })?;
    let shots = *config.shots.get_or_insert(0);
    let built = match &config.pool {
        None => PromptTemplate::with_appendix_pool(id, shots),
        Some(path) => {
            let corpus: Corpus = crate::load_corpus(path, Split::Train, inventory)?;
            PromptTemplate::new(id, shots, exemplars_from_corpus(&corpus))
        }
    };
    built.map_err(|e| CliError::Usage(e.to_string()))
}
