//! Review corpora: SemEval-style XML ingestion, the canonical JSON-lines
//! form, and corpus statistics.
//!
//! Spans are measured in Unicode scalar values (`char`s), matching the
//! `from`/`to` attributes of the public SemEval distribution.

mod canonical;
mod inventory;
mod semeval;
mod stats;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use canonical::{parse_canonical, write_canonical};
pub use inventory::{Head, LabelInventory};
pub use semeval::parse_semeval_xml;
pub use stats::{corpus_stats, StatsReport};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed XML at line {line}, column {column}: {message}")]
    Xml {
        line: u32,
        column: u32,
        message: String,
    },
    #[error("invalid corpus structure: {0}")]
    Structure(String),
    #[error("sentence {sentence_id}: unknown {head} {value:?}")]
    InventoryViolation {
        sentence_id: String,
        head: &'static str,
        value: String,
    },
    #[error("sentence {sentence_id}: span {start}..{end} does not match target {surface:?}")]
    Span {
        sentence_id: String,
        start: usize,
        end: usize,
        surface: String,
    },
    #[error("sentence {sentence_id}: {source}")]
    Category {
        sentence_id: String,
        source: CategoryError,
    },
    #[error("line {line}: {message}")]
    Json { line: usize, message: String },
    #[error("duplicate sentence id {0:?}")]
    DuplicateId(String),
    #[error("sentence {0:?} has empty text")]
    EmptyText(String),
    #[error("invalid label inventory: {message}")]
    Inventory { message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("category {0:?} must contain exactly one '#'")]
pub struct CategoryError(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

/// A character span `start..end` into a sentence, with the covered text.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TargetSpan {
    pub start: usize,
    pub end: usize,
    pub surface: String,
}

/// One annotated opinion. `target == None` means the opinion is implicit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Opinion {
    pub target: Option<TargetSpan>,
    pub entity: String,
    pub aspect: String,
    pub sentiment: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReviewSentence {
    pub id: String,
    pub text: String,
    pub opinions: Vec<Opinion>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub split: Split,
    pub sentences: Vec<ReviewSentence>,
    pub inventory: LabelInventory,
}

/// Splits a combined `ENTITY#ASPECT` category, upper-casing both halves.
pub fn split_category(category: &str) -> Result<(String, String), CategoryError> {
    let mut parts = category.split('#');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(e), Some(a), None) => Ok((e.trim().to_uppercase(), a.trim().to_uppercase())),
        _ => Err(CategoryError(category.to_string())),
    }
}

/// Slice of `text` between two char offsets, `None` when out of range.
pub fn char_slice(text: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let mut indices = text.char_indices().map(|(i, _)| i).chain(std::iter::once(text.len()));
    let begin = indices.by_ref().nth(start)?;
    let finish = if end == start {
        begin
    } else {
        indices.nth(end - start - 1)?
    };
    Some(&text[begin..finish])
}

impl Opinion {
    pub fn is_implicit(&self) -> bool {
        self.target.is_none()
    }

    fn validate(
        &self,
        sentence_id: &str,
        text: &str,
        inventory: &LabelInventory,
    ) -> Result<(), CorpusError> {
        for (head, value) in [
            (Head::Entity, &self.entity),
            (Head::Aspect, &self.aspect),
            (Head::Sentiment, &self.sentiment),
        ] {
            if !inventory.contains(head, value) {
                return Err(CorpusError::InventoryViolation {
                    sentence_id: sentence_id.to_string(),
                    head: head.name(),
                    value: value.clone(),
                });
            }
        }
        if let Some(span) = &self.target {
            let ok = span.start < span.end
                && char_slice(text, span.start, span.end) == Some(span.surface.as_str());
            if !ok {
                return Err(CorpusError::Span {
                    sentence_id: sentence_id.to_string(),
                    start: span.start,
                    end: span.end,
                    surface: span.surface.clone(),
                });
            }
        }
        Ok(())
    }
}

impl ReviewSentence {
    /// Validates the opinions and collapses exact duplicates (first kept).
    pub(crate) fn checked(
        id: String,
        text: String,
        opinions: Vec<Opinion>,
        inventory: &LabelInventory,
    ) -> Result<Self, CorpusError> {
        if text.is_empty() {
            return Err(CorpusError::EmptyText(id));
        }
        let mut unique: Vec<Opinion> = Vec::with_capacity(opinions.len());
        for op in opinions {
            op.validate(&id, &text, inventory)?;
            if unique.contains(&op) {
                log::warn!("sentence {id}: dropping duplicate opinion {op:?}");
                continue;
            }
            unique.push(op);
        }
        Ok(ReviewSentence {
            id,
            text,
            opinions: unique,
        })
    }
}

impl Corpus {
    /// Builds a corpus, validating every sentence against `inventory`.
    pub fn new(
        split: Split,
        sentences: Vec<ReviewSentence>,
        inventory: LabelInventory,
    ) -> Result<Self, CorpusError> {
        let mut ids = HashSet::new();
        let mut checked = Vec::with_capacity(sentences.len());
        for s in sentences {
            if !ids.insert(s.id.clone()) {
                return Err(CorpusError::DuplicateId(s.id));
            }
            checked.push(ReviewSentence::checked(s.id, s.text, s.opinions, &inventory)?);
        }
        Ok(Corpus {
            split,
            sentences: checked,
            inventory,
        })
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&ReviewSentence> {
        self.sentences.iter().find(|s| s.id == id)
    }
}
