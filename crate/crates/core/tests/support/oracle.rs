//! Independent scorer: exhaustive search over one-to-one matchings, with
//! its own target and key comparison rules. Also generates random
//! gold/prediction corpora to compare against.
#![allow(dead_code)]

use std::collections::HashMap;
use std::ops::Range;

use easte::corpus::{Corpus, LabelInventory, Opinion, ReviewSentence, Split, TargetSpan};
use easte::eval::{PredQuad, Regime, ScoreMode, SentencePrediction};
use easte::labeling::Quad;
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub matched: usize,
    pub gold_total: usize,
    pub pred_total: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Token range of a char span in a text of single-space separated words.
fn word_range(text: &str, start: usize, end: usize) -> Range<usize> {
    let mut offset = 0;
    let (mut first, mut last) = (None, 0);
    for (i, w) in text.split(' ').enumerate() {
        let w_end = offset + w.chars().count();
        if offset < end && w_end > start {
            first.get_or_insert(i);
            last = i + 1;
        }
        offset = w_end + 1;
    }
    first.expect("span covers a word")..last
}

fn targets_agree(gold: &Opinion, gold_range: &Option<Range<usize>>, pred: &PredQuad, regime: Regime) -> bool {
    match regime {
        Regime::Token => match (gold_range, &pred.quad.target, &pred.tokens) {
            (None, None, _) => true,
            (Some(g), Some(_), Some(p)) => {
                let inter = g.end.min(p.end).saturating_sub(g.start.max(p.start));
                inter as f64 / g.len() as f64 >= 0.5
            }
            _ => false,
        },
        Regime::Generative => match (&gold.target, &pred.quad.target) {
            (None, None) => true,
            (Some(g), Some(p)) => g.surface.trim().eq_ignore_ascii_case(p.trim()),
            _ => false,
        },
    }
}

fn keys_agree(gold: &Opinion, pred: &Quad, mode: ScoreMode) -> bool {
    let e = gold.entity == pred.entity;
    let a = gold.aspect == pred.aspect;
    let s = gold.sentiment == pred.sentiment;
    match mode {
        ScoreMode::Easte | ScoreMode::Tasd => e && a && s,
        ScoreMode::ElementEntity => e,
        ScoreMode::ElementAspect => a,
        ScoreMode::ElementSentiment => s,
    }
}

/// Largest number of disjoint compatible pairs, by trying every option for
/// every gold item (memoised on the set of used predictions).
pub fn best_matching(n_gold: usize, n_pred: usize, ok: &dyn Fn(usize, usize) -> bool) -> usize {
    fn go(
        g: usize,
        used: u32,
        n_gold: usize,
        n_pred: usize,
        ok: &dyn Fn(usize, usize) -> bool,
        memo: &mut HashMap<(usize, u32), usize>,
    ) -> usize {
        if g == n_gold {
            return 0;
        }
        if let Some(&v) = memo.get(&(g, used)) {
            return v;
        }
        let mut best = go(g + 1, used, n_gold, n_pred, ok, memo);
        for p in 0..n_pred {
            if used & (1 << p) == 0 && ok(g, p) {
                best = best.max(1 + go(g + 1, used | (1 << p), n_gold, n_pred, ok, memo));
            }
        }
        memo.insert((g, used), best);
        best
    }
    assert!(n_pred < 32);
    go(0, 0, n_gold, n_pred, ok, &mut HashMap::new())
}

pub fn oracle_score(gold: &Corpus, preds: &[SentencePrediction], mode: ScoreMode, regime: Regime) -> OracleReport {
    let (mut matched, mut gold_total, mut pred_total) = (0, 0, 0);
    for s in &gold.sentences {
        let empty = Vec::new();
        let p = preds.iter().find(|p| p.id == s.id).map_or(&empty, |p| &p.quads);
        let ranges: Vec<Option<Range<usize>>> = s
            .opinions
            .iter()
            .map(|o| o.target.as_ref().map(|t| word_range(&s.text, t.start, t.end)))
            .collect();
        matched += best_matching(s.opinions.len(), p.len(), &|g, j| {
            keys_agree(&s.opinions[g], &p[j].quad, mode) && targets_agree(&s.opinions[g], &ranges[g], &p[j], regime)
        });
        gold_total += s.opinions.len();
        pred_total += p.len();
    }
    let precision = if pred_total > 0 {
        matched as f64 / pred_total as f64
    } else if gold_total == 0 {
        1.0
    } else {
        0.0
    };
    let recall = if gold_total > 0 {
        matched as f64 / gold_total as f64
    } else if pred_total == 0 {
        1.0
    } else {
        0.0
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    OracleReport {
        matched,
        gold_total,
        pred_total,
        precision,
        recall,
        f1,
    }
}

const WORDS: [&str; 6] = ["pasta", "staff", "wine", "room", "menu", "bar"];
const ENTITIES: [&str; 2] = ["FOOD", "SERVICE"];
const ASPECTS: [&str; 2] = ["QUALITY", "GENERAL"];
const SENTIMENTS: [&str; 2] = ["positive", "negative"];

fn pick<R: Rng>(rng: &mut R, xs: &[&str]) -> String {
    xs.choose(rng).unwrap().to_string()
}

fn quad<R: Rng>(rng: &mut R, target: Option<String>) -> Quad {
    Quad {
        target,
        entity: pick(rng, &ENTITIES),
        aspect: pick(rng, &ASPECTS),
        sentiment: pick(rng, &SENTIMENTS),
    }
}

fn random_range<R: Rng>(rng: &mut R, len: usize) -> Range<usize> {
    let start = rng.gen_range(0..len);
    start..rng.gen_range(start + 1..=len.min(start + 4))
}

/// A random gold corpus (at most `max_quads` opinions per sentence) and
/// predictions that partly copy and perturb the gold.
pub fn random_case<R: Rng>(rng: &mut R, sentences: usize, max_quads: usize) -> (Corpus, Vec<SentencePrediction>) {
    let mut gold = Vec::new();
    let mut preds = Vec::new();
    for i in 0..sentences {
        let words: Vec<&str> = (0..rng.gen_range(1..8)).map(|_| *WORDS.choose(rng).unwrap()).collect();
        let text = words.join(" ");
        let starts: Vec<usize> = words
            .iter()
            .scan(0, |acc, w| {
                let s = *acc;
                *acc += w.len() + 1;
                Some(s)
            })
            .collect();
        let surface = |r: &Range<usize>| words[r.clone()].join(" ");
        let mut opinions = Vec::new();
        let mut gold_ranges = Vec::new();
        for _ in 0..rng.gen_range(0..=max_quads) {
            let range = rng.gen_bool(0.7).then(|| random_range(rng, words.len()));
            let q = quad(rng, range.as_ref().map(surface));
            opinions.push(Opinion {
                target: range.as_ref().map(|r| TargetSpan {
                    start: starts[r.start],
                    end: starts[r.end - 1] + words[r.end - 1].len(),
                    surface: surface(r),
                }),
                entity: q.entity,
                aspect: q.aspect,
                sentiment: q.sentiment,
            });
            gold_ranges.push(range);
        }
        let id = format!("c{i}");
        let mut quads = Vec::new();
        for _ in 0..rng.gen_range(0..=max_quads) {
            let copy = !opinions.is_empty() && rng.gen_bool(0.6);
            let mut range = if copy {
                gold_ranges[rng.gen_range(0..gold_ranges.len())].clone()
            } else {
                rng.gen_bool(0.7).then(|| random_range(rng, words.len()))
            };
            if let Some(r) = &mut range {
                if rng.gen_bool(0.3) {
                    *r = random_range(rng, words.len());
                }
            }
            let mut target = range.as_ref().map(surface);
            if let Some(t) = &mut target {
                match rng.gen_range(0..4) {
                    0 => *t = t.to_uppercase(),
                    1 => *t = format!(" {t} "),
                    2 => *t = pick(rng, &WORDS),
                    _ => {}
                }
            }
            let mut q = quad(rng, target);
            if copy && rng.gen_bool(0.5) {
                let g = &opinions[rng.gen_range(0..opinions.len())];
                q.entity = g.entity.clone();
                q.aspect = g.aspect.clone();
                q.sentiment = g.sentiment.clone();
            }
            let tokens = range.filter(|_| rng.gen_bool(0.9));
            quads.push(PredQuad { quad: q, tokens });
        }
        gold.push(ReviewSentence {
            id: id.clone(),
            text,
            opinions,
        });
        if rng.gen_bool(0.85) {
            preds.push(SentencePrediction { id, quads });
        }
    }
    preds.shuffle(rng);
    let corpus = Corpus::new(Split::Test, gold, LabelInventory::default()).unwrap();
    (corpus, preds)
}
