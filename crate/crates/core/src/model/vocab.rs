use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::labeling::{tokenize, Token};

pub const UNK: &str = "[UNK]";

/// Lower-cased word vocabulary; id 0 is the unknown-word entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, u32>,
}

impl From<Vec<String>> for Vocabulary {
    fn from(words: Vec<String>) -> Self {
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        Vocabulary { words, index }
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.words
    }
}

impl Vocabulary {
    /// Sorted vocabulary of every token in the corpus, after `[UNK]`.
    pub fn from_corpus(corpus: &Corpus) -> Self {
        let words: BTreeSet<String> = corpus
            .sentences
            .iter()
            .flat_map(|s| tokenize(&s.text))
            .map(|t| t.surface.to_lowercase())
            .collect();
        let mut all = vec![UNK.to_string()];
        all.extend(words.into_iter().filter(|w| w != UNK));
        Vocabulary::from(all)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> u32 {
        self.index.get(&word.to_lowercase()).copied().unwrap_or(0)
    }

    pub fn encode(&self, tokens: &[Token]) -> Vec<u32> {
        tokens.iter().map(|t| self.id(&t.surface)).collect()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}
