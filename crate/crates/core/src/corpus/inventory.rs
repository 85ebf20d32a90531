use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// Which label head a raw value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Head {
    Entity,
    Aspect,
    Sentiment,
}

impl Head {
    pub const ALL: [Head; 3] = [Head::Entity, Head::Aspect, Head::Sentiment];

    pub fn name(self) -> &'static str {
        match self {
            Head::Entity => "entity",
            Head::Aspect => "aspect",
            Head::Sentiment => "sentiment",
        }
    }
}

/// The closed label sets for entities, aspects and sentiments.
///
/// Entities and aspects are upper-case identifiers, sentiments lower-case.
/// Order is significant: class index `i + 1` of a model head refers to the
/// `i`-th member, index 0 is reserved for NONE.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabelInventory {
    entities: Vec<String>,
    aspects: Vec<String>,
    sentiments: Vec<String>,
}

#[derive(Deserialize)]
struct RawInventory {
    entities: Vec<String>,
    aspects: Vec<String>,
    sentiments: Vec<String>,
}

impl<'de> Deserialize<'de> for LabelInventory {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawInventory::deserialize(d)?;
        LabelInventory::new(raw.entities, raw.aspects, raw.sentiments)
            .map_err(serde::de::Error::custom)
    }
}

impl Default for LabelInventory {
    fn default() -> Self {
        let s = |xs: &[&str]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        LabelInventory {
            entities: s(&["FOOD", "RESTAURANT", "SERVICE", "AMBIENCE", "DRINKS", "LOCATION"]),
            aspects: s(&["QUALITY", "STYLE_OPTIONS", "GENERAL", "PRICES", "MISCELLANEOUS"]),
            sentiments: s(&["positive", "negative", "neutral"]),
        }
    }
}

impl LabelInventory {
    pub fn new(
        entities: Vec<String>,
        aspects: Vec<String>,
        sentiments: Vec<String>,
    ) -> Result<Self, CorpusError> {
        check_set("entities", &entities, |s| s.to_uppercase())?;
        check_set("aspects", &aspects, |s| s.to_uppercase())?;
        check_set("sentiments", &sentiments, |s| s.to_lowercase())?;
        Ok(LabelInventory {
            entities,
            aspects,
            sentiments,
        })
    }

    /// Reads an inventory from a JSON document `{entities, aspects, sentiments}`.
    pub fn from_json(bytes: &[u8]) -> Result<Self, CorpusError> {
        serde_json::from_slice(bytes).map_err(|e| CorpusError::Inventory {
            message: e.to_string(),
        })
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn aspects(&self) -> &[String] {
        &self.aspects
    }

    pub fn sentiments(&self) -> &[String] {
        &self.sentiments
    }

    pub fn members(&self, head: Head) -> &[String] {
        match head {
            Head::Entity => &self.entities,
            Head::Aspect => &self.aspects,
            Head::Sentiment => &self.sentiments,
        }
    }

    /// Position of `value` within the head's set.
    pub fn index_of(&self, head: Head, value: &str) -> Option<usize> {
        self.members(head).iter().position(|m| m == value)
    }

    pub fn contains(&self, head: Head, value: &str) -> bool {
        self.index_of(head, value).is_some()
    }

    /// Number of classes of a model head over this inventory, NONE included.
    pub fn head_size(&self, head: Head) -> usize {
        self.members(head).len() + 1
    }
}

fn check_set(
    name: &str,
    values: &[String],
    canon: impl Fn(&str) -> String,
) -> Result<(), CorpusError> {
    if values.is_empty() {
        return Err(CorpusError::Inventory {
            message: format!("{name} must not be empty"),
        });
    }
    let mut seen = HashSet::new();
    for v in values {
        if v.is_empty() || v.trim() != v || canon(v) != *v {
            return Err(CorpusError::Inventory {
                message: format!("{name}: invalid identifier {v:?}"),
            });
        }
        if !seen.insert(v.as_str()) {
            return Err(CorpusError::Inventory {
                message: format!("{name}: duplicate identifier {v:?}"),
            });
        }
    }
    Ok(())
}
