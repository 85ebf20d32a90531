use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::LabelingError;

/// A word-level token with char offsets into its sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub start: usize,
    pub end: usize,
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation() || matches!(c, '“' | '”' | '‘' | '’' | '…' | '–' | '—' | '«' | '»' | '¡' | '¿')
}

/// Whitespace tokenizer that also peels leading and trailing punctuation
/// characters off each chunk, one token per punctuation character.
/// Inner punctuation (`don't`, `prix-fixe`) stays attached.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let chunk_start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        push_chunk(&chars, chunk_start, i, &mut tokens);
    }
    tokens
}

fn push_chunk(chars: &[char], start: usize, end: usize, out: &mut Vec<Token>) {
    let single = |at: usize| Token {
        surface: chars[at].to_string(),
        start: at,
        end: at + 1,
    };
    let mut lo = start;
    while lo < end && is_punct(chars[lo]) {
        out.push(single(lo));
        lo += 1;
    }
    let mut hi = end;
    while hi > lo && is_punct(chars[hi - 1]) {
        hi -= 1;
    }
    if lo < hi {
        out.push(Token {
            surface: chars[lo..hi].iter().collect(),
            start: lo,
            end: hi,
        });
    }
    out.extend((hi..end).map(single));
}

/// Smallest contiguous token range containing every token that overlaps the
/// char span `start..end`.
pub fn align_target(tokens: &[Token], start: usize, end: usize) -> Result<Range<usize>, LabelingError> {
    let mut hits = tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| t.start < end && t.end > start)
        .map(|(i, _)| i);
    let first = hits.next().ok_or(LabelingError::Alignment { start, end })?;
    let last = hits.last().unwrap_or(first);
    Ok(first..last + 1)
}
