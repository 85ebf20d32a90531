//! Prompt rendering, completion retrieval and answer parsing.

mod complete;
mod parse;
mod templates;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{Head, LabelInventory};
use crate::labeling::Quad;

pub use complete::{
    prompt_digest, Completer, Completion, CompletionError, CompletionSource, EndpointConfig,
    RequestStyle, RunLog,
};
pub use parse::{parse_colon_format, parse_json_triplet};
pub use templates::{
    appendix_exemplars, exemplars_from_corpus, render_prompt, Exemplar, PromptTemplate,
    TemplateId, MAX_SHOTS,
};

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("prompt configuration: {0}")]
    Config(String),
    #[error("{head} label {value:?} is not in the inventory")]
    Label { head: &'static str, value: String },
}

/// An unparseable piece of model output. `position` is a byte offset into
/// the raw text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ParseOutcome {
    pub quads: Vec<Quad>,
    pub diagnostics: Vec<Diagnostic>,
}

impl ParseOutcome {
    pub(crate) fn diagnose(&mut self, position: usize, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic {
            position,
            message: message.into(),
        });
    }

    pub(crate) fn push_unique(&mut self, quad: Quad) {
        if !self.quads.contains(&quad) {
            self.quads.push(quad);
        }
    }
}

/// Gold quads in the colon answer style:
/// `term:entity:aspect:sentiment, ...` with lower-case labels and `NULL`
/// for implicit targets.
pub fn render_gold(quads: &[Quad]) -> String {
    quads
        .iter()
        .map(|q| {
            format!(
                "{}:{}:{}:{}",
                q.target.as_deref().unwrap_or("NULL"),
                q.entity.to_lowercase(),
                q.aspect.to_lowercase(),
                q.sentiment.to_lowercase()
            )
        })
        .collect::<Vec<_>>()
        .join(", ")
}

const QUOTES: &[char] = &['"', '\'', '`'];

/// Canonical inventory spelling of a generated label.
pub fn normalize_label(raw: &str, head: Head, inventory: &LabelInventory) -> Result<String, PromptError> {
    let mut value = raw.trim();
    loop {
        let stripped = value.trim_matches(QUOTES).trim();
        if stripped == value {
            break;
        }
        value = stripped;
    }
    let value = value.replace("\\_", "_");
    let value = match head {
        Head::Sentiment => value.to_lowercase(),
        Head::Entity | Head::Aspect => value.to_uppercase(),
    };
    if inventory.contains(head, &value) {
        Ok(value)
    } else {
        Err(PromptError::Label {
            head: head.name(),
            value,
        })
    }
}
