//! Random annotated sentences for label-codec checks.
#![allow(dead_code)]

use std::collections::BTreeMap;

use easte::corpus::{LabelInventory, Opinion, ReviewSentence, TargetSpan};
use easte::labeling::Triple;
use rand::seq::SliceRandom;
use rand::Rng;

const WORDS: [&str; 8] = ["the", "grilled", "salmon", "was", "cold", "but", "staff", "kind"];

fn triple<R: Rng>(rng: &mut R) -> Triple {
    let inv = LabelInventory::default();
    Triple {
        entity: inv.entities().choose(rng).unwrap().clone(),
        aspect: inv.aspects().choose(rng).unwrap().clone(),
        sentiment: inv.sentiments().choose(rng).unwrap().clone(),
    }
}

struct Draft {
    text: String,
    /// Char offsets of each word (punctuation excluded).
    spans: Vec<(usize, usize)>,
}

fn draft<R: Rng>(rng: &mut R, words: usize) -> Draft {
    let mut text = String::new();
    let mut spans = Vec::new();
    for i in 0..words {
        if i > 0 {
            text.push(' ');
        }
        let w = WORDS.choose(rng).unwrap();
        let start = text.chars().count();
        text.push_str(w);
        spans.push((start, start + w.len()));
        if rng.gen_bool(0.15) {
            text.push(*[',', '!', '.'].choose(rng).unwrap());
        }
    }
    Draft { text, spans }
}

fn opinion(d: &Draft, range: Option<(usize, usize)>, t: Triple) -> Opinion {
    Opinion {
        target: range.map(|(a, b)| {
            let (start, end) = (d.spans[a].0, d.spans[b - 1].1);
            TargetSpan {
                start,
                end,
                surface: d.text.chars().skip(start).take(end - start).collect(),
            }
        }),
        entity: t.entity,
        aspect: t.aspect,
        sentiment: t.sentiment,
    }
}

/// Opinions on disjoint word ranges, where touching ranges never share a
/// triple, plus at most one implicit opinion.
pub fn collision_free<R: Rng>(rng: &mut R, id: usize) -> ReviewSentence {
    let n = rng.gen_range(1..12);
    let d = draft(rng, n);
    let mut opinions = Vec::new();
    let mut pos = 0;
    let mut previous: Option<(usize, Triple)> = None;
    while pos < d.spans.len() {
        if rng.gen_bool(0.5) {
            pos += 1;
            continue;
        }
        let end = rng.gen_range(pos + 1..=d.spans.len().min(pos + 3));
        let mut t = triple(rng);
        while matches!(&previous, Some((e, p)) if *e == pos && *p == t) {
            t = triple(rng);
        }
        opinions.push(opinion(&d, Some((pos, end)), t.clone()));
        previous = Some((end, t));
        pos = end;
    }
    if rng.gen_bool(0.4) {
        opinions.push(opinion(&d, None, triple(rng)));
    }
    opinions.shuffle(rng);
    ReviewSentence {
        id: format!("g{id}"),
        text: d.text,
        opinions,
    }
}

/// Opinions on arbitrary, possibly overlapping ranges with few distinct
/// triples, so that collisions are common.
pub fn colliding<R: Rng>(rng: &mut R, id: usize) -> ReviewSentence {
    let n = rng.gen_range(1..8);
    let d = draft(rng, n);
    let pool: Vec<Triple> = (0..2).map(|_| triple(rng)).collect();
    let opinions = (0..rng.gen_range(0..7))
        .map(|_| {
            let range = rng.gen_bool(0.75).then(|| {
                let a = rng.gen_range(0..d.spans.len());
                (a, rng.gen_range(a + 1..=d.spans.len().min(a + 3)))
            });
            opinion(&d, range, pool.choose(rng).unwrap().clone())
        })
        .collect();
    ReviewSentence {
        id: format!("k{id}"),
        text: d.text,
        opinions,
    }
}

/// Indices of opinions that lose their slots, replaying annotation order
/// over word positions (`None` standing for the implicit slot).
pub fn expected_losers(sentence: &ReviewSentence) -> Vec<usize> {
    let mut words: Vec<(usize, usize)> = Vec::new();
    let mut offset = 0;
    for w in sentence.text.split(' ') {
        let core = w.trim_end_matches([',', '!', '.']);
        words.push((offset, offset + core.chars().count()));
        offset += w.chars().count() + 1;
    }
    let mut owner: BTreeMap<Option<usize>, (String, String, String)> = BTreeMap::new();
    let mut losers = Vec::new();
    for (i, op) in sentence.opinions.iter().enumerate() {
        let slots: Vec<Option<usize>> = match &op.target {
            None => vec![None],
            Some(t) => (0..words.len())
                .filter(|&w| words[w].0 < t.end && words[w].1 > t.start)
                .map(Some)
                .collect(),
        };
        let key = (op.entity.clone(), op.aspect.clone(), op.sentiment.clone());
        if slots.iter().any(|s| owner.get(s).is_some_and(|k| *k != key)) {
            losers.push(i);
        } else {
            for s in slots {
                owner.insert(s, key.clone());
            }
        }
    }
    losers
}
