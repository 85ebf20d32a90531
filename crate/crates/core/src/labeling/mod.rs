//! Tokenization and the quadruple <-> per-token label codec.
//!
//! A [`TokenLabeling`] has one slot per token plus a sentence-level
//! sentinel at slot 0 that carries the triple of an implicit opinion.
//! Each slot holds at most one `(entity, aspect, sentiment)` triple.

mod tokenize;

use std::collections::HashSet;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Opinion, ReviewSentence};

pub use tokenize::{align_target, tokenize, Token};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelingError {
    #[error("span {start}..{end} overlaps no token")]
    Alignment { start: usize, end: usize },
    #[error("sentence {sentence_id}: {source}")]
    Sentence {
        sentence_id: String,
        source: Box<LabelingError>,
    },
}

/// A fully specified `(entity, aspect, sentiment)` label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub entity: String,
    pub aspect: String,
    pub sentiment: String,
}

/// A `(target, entity, aspect, sentiment)` quadruple; `target == None` is
/// the implicit (NULL) target.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Quad {
    pub target: Option<String>,
    pub entity: String,
    pub aspect: String,
    pub sentiment: String,
}

impl Quad {
    pub fn new(target: Option<String>, triple: Triple) -> Self {
        let target = target.filter(|t| !t.trim().is_empty());
        Quad {
            target,
            entity: triple.entity,
            aspect: triple.aspect,
            sentiment: triple.sentiment,
        }
    }

    pub fn triple(&self) -> Triple {
        Triple {
            entity: self.entity.clone(),
            aspect: self.aspect.clone(),
            sentiment: self.sentiment.clone(),
        }
    }
}

impl From<&Opinion> for Triple {
    fn from(op: &Opinion) -> Self {
        Triple {
            entity: op.entity.clone(),
            aspect: op.aspect.clone(),
            sentiment: op.sentiment.clone(),
        }
    }
}

impl From<&Opinion> for Quad {
    fn from(op: &Opinion) -> Self {
        Quad::new(op.target.as_ref().map(|t| t.surface.clone()), Triple::from(op))
    }
}

/// Gold quadruples of a sentence, deduplicated, in annotation order.
pub fn gold_quads(sentence: &ReviewSentence) -> Vec<Quad> {
    dedup(sentence.opinions.iter().map(Quad::from))
}

fn dedup<T: Clone + Eq + std::hash::Hash>(items: impl IntoIterator<Item = T>) -> Vec<T> {
    let mut seen = HashSet::new();
    items.into_iter().filter(|q| seen.insert(q.clone())).collect()
}

/// Per-slot labels for one tokenized sentence. `labels[0]` is the
/// sentinel, `labels[i + 1]` belongs to `tokens[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenLabeling {
    pub text: String,
    pub tokens: Vec<Token>,
    pub labels: Vec<Option<Triple>>,
}

impl TokenLabeling {
    /// An all-NONE labeling of `text`.
    pub fn empty(text: &str) -> Self {
        let tokens = tokenize(text);
        let labels = vec![None; tokens.len() + 1];
        TokenLabeling {
            text: text.to_string(),
            tokens,
            labels,
        }
    }

    pub fn slot_count(&self) -> usize {
        self.labels.len()
    }

    pub fn sentinel(&self) -> Option<&Triple> {
        self.labels[0].as_ref()
    }

    /// Slot index of token `i`.
    pub fn slot_of(token: usize) -> usize {
        token + 1
    }

    /// Number of slots carrying a label.
    pub fn labeled_slots(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }
}

/// Why an opinion could not be written into a labeling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Collision {
    pub sentence_id: String,
    /// Index of the losing opinion in annotation order.
    pub opinion_index: usize,
    pub target: Option<String>,
    pub rejected: Triple,
    /// First contested slot (0 = sentinel) and the triple already there.
    pub slot: usize,
    pub existing: Triple,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoded {
    pub labeling: TokenLabeling,
    pub collisions: Vec<Collision>,
}

/// Writes every opinion's triple onto its slots: explicit opinions onto the
/// aligned token range, implicit ones onto the sentinel.
///
/// Opinions are applied in annotation order. An opinion that would
/// overwrite a different triple on any of its slots is dropped entirely and
/// reported as a [`Collision`]; the earlier opinion keeps the slots.
pub fn encode_labels(sentence: &ReviewSentence) -> Result<Encoded, LabelingError> {
    let mut labeling = TokenLabeling::empty(&sentence.text);
    let mut collisions = Vec::new();
    for (index, op) in sentence.opinions.iter().enumerate() {
        let slots = match &op.target {
            None => 0..1,
            Some(span) => {
                let range = align_target(&labeling.tokens, span.start, span.end).map_err(|e| {
                    LabelingError::Sentence {
                        sentence_id: sentence.id.clone(),
                        source: Box::new(e),
                    }
                })?;
                TokenLabeling::slot_of(range.start)..TokenLabeling::slot_of(range.end)
            }
        };
        let triple = Triple::from(op);
        let contested = slots.clone().find_map(|slot| match &labeling.labels[slot] {
            Some(existing) if *existing != triple => Some((slot, existing.clone())),
            _ => None,
        });
        match contested {
            Some((slot, existing)) => collisions.push(Collision {
                sentence_id: sentence.id.clone(),
                opinion_index: index,
                target: op.target.as_ref().map(|t| t.surface.clone()),
                rejected: triple,
                slot,
                existing,
            }),
            None => {
                for slot in slots {
                    labeling.labels[slot] = Some(triple.clone());
                }
            }
        }
    }
    Ok(Encoded {
        labeling,
        collisions,
    })
}

/// A decoded quad together with the token range its target came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedQuad {
    pub quad: Quad,
    /// Token indices (not slot indices) of the run; `None` for the sentinel.
    pub tokens: Option<Range<usize>>,
}

/// Like [`decode_labels`], keeping the token range of each quad's first run.
pub fn decode_with_spans(labeling: &TokenLabeling) -> Vec<DecodedQuad> {
    let mut out = Vec::new();
    if let Some(t) = labeling.sentinel() {
        out.push(DecodedQuad {
            quad: Quad::new(None, t.clone()),
            tokens: None,
        });
    }
    let token_labels = &labeling.labels[1..];
    let mut i = 0;
    while i < token_labels.len() {
        let Some(triple) = &token_labels[i] else {
            i += 1;
            continue;
        };
        let start = i;
        while i < token_labels.len() && token_labels[i].as_ref() == Some(triple) {
            i += 1;
        }
        let first = &labeling.tokens[start];
        let last = &labeling.tokens[i - 1];
        let surface = crate::corpus::char_slice(&labeling.text, first.start, last.end)
            .map(str::to_string)
            .unwrap_or_else(|| {
                labeling.tokens[start..i]
                    .iter()
                    .map(|t| t.surface.as_str())
                    .collect::<Vec<_>>()
                    .join(" ")
            });
        out.push(DecodedQuad {
            quad: Quad::new(Some(surface), triple.clone()),
            tokens: Some(start..i),
        });
    }
    let mut seen = HashSet::new();
    out.retain(|d| seen.insert(d.quad.clone()));
    out
}

/// Maximal runs of identical token triples become one quad each; a labeled
/// sentinel becomes an implicit-target quad. Duplicates are removed.
pub fn decode_labels(labeling: &TokenLabeling) -> Vec<Quad> {
    decode_with_spans(labeling).into_iter().map(|d| d.quad).collect()
}
