//! Matching predicted quads against gold and micro-averaged P/R/F1.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, ReviewSentence};
use crate::labeling::{align_target, tokenize, LabelingError, Quad};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prediction for unknown sentence id {0:?}")]
    UnknownSentence(String),
    #[error("more than one prediction entry for sentence id {0:?}")]
    DuplicatePrediction(String),
    #[error("{0}")]
    Mode(String),
    #[error(transparent)]
    Labeling(#[from] LabelingError),
}

/// Which parts of a quad must agree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreMode {
    Easte,
    Tasd,
    ElementEntity,
    ElementAspect,
    ElementSentiment,
}

impl ScoreMode {
    pub const ALL: [ScoreMode; 5] = [
        ScoreMode::Easte,
        ScoreMode::Tasd,
        ScoreMode::ElementEntity,
        ScoreMode::ElementAspect,
        ScoreMode::ElementSentiment,
    ];

    /// Accepts both `entity` and `element-entity` style names.
    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "easte" => Some(ScoreMode::Easte),
            "tasd" => Some(ScoreMode::Tasd),
            "entity" | "element-entity" => Some(ScoreMode::ElementEntity),
            "aspect" | "element-aspect" => Some(ScoreMode::ElementAspect),
            "sentiment" | "element-sentiment" => Some(ScoreMode::ElementSentiment),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScoreMode::Easte => "easte",
            ScoreMode::Tasd => "tasd",
            ScoreMode::ElementEntity => "element-entity",
            ScoreMode::ElementAspect => "element-aspect",
            ScoreMode::ElementSentiment => "element-sentiment",
        }
    }

    pub fn is_element(self) -> bool {
        !matches!(self, ScoreMode::Easte | ScoreMode::Tasd)
    }
}

/// How targets are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Token slots: at least half of the gold target tokens.
    Token,
    /// Generated terms: case-insensitive equality after trimming.
    Generative,
}

impl Regime {
    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "token" => Some(Regime::Token),
            "generative" => Some(Regime::Generative),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::Token => "token",
            Regime::Generative => "generative",
        }
    }
}

/// A valid mode/regime pair. Element modes exist only for the token regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct EvalMode {
    mode: ScoreMode,
    regime: Regime,
}

impl EvalMode {
    pub fn new(mode: ScoreMode, regime: Regime) -> Result<Self, EvalError> {
        if mode.is_element() && regime == Regime::Generative {
            return Err(EvalError::Mode(format!(
                "{} is only defined for the token regime",
                mode.name()
            )));
        }
        Ok(EvalMode { mode, regime })
    }

    /// Every valid combination.
    pub fn all() -> Vec<EvalMode> {
        ScoreMode::ALL
            .into_iter()
            .flat_map(|m| [Regime::Token, Regime::Generative].map(|r| EvalMode::new(m, r)))
            .filter_map(Result::ok)
            .collect()
    }

    pub fn mode(self) -> ScoreMode {
        self.mode
    }

    pub fn regime(self) -> Regime {
        self.regime
    }
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.mode.name(), self.regime.name())
    }
}

/// A gold quad with the token range of its target (`None` when implicit).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldQuad {
    #[serde(flatten)]
    pub quad: Quad,
    pub tokens: Option<Range<usize>>,
}

/// A predicted quad. Token-regime predictions carry the slots their
/// triple was predicted on; generated ones usually carry none.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredQuad {
    #[serde(flatten)]
    pub quad: Quad,
    #[serde(default)]
    pub tokens: Option<Range<usize>>,
}

impl From<Quad> for PredQuad {
    fn from(quad: Quad) -> Self {
        PredQuad { quad, tokens: None }
    }
}

/// All predictions for one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePrediction {
    pub id: String,
    pub quads: Vec<PredQuad>,
}

/// Quad with `entity#aspect` folded into one category.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TasdQuad {
    pub target: Option<String>,
    pub category: String,
    pub sentiment: String,
}

pub fn chain_tasd(quad: &Quad) -> TasdQuad {
    TasdQuad {
        target: quad.target.clone(),
        category: format!("{}#{}", quad.entity, quad.aspect),
        sentiment: quad.sentiment.clone(),
    }
}

/// Whether at least half of the gold range is covered by `predicted`.
/// An empty gold range is never matched.
pub fn overlap_correct(gold: &Range<usize>, predicted: &[usize]) -> bool {
    if gold.is_empty() {
        return false;
    }
    let hits = predicted
        .iter()
        .filter(|t| gold.contains(t))
        .collect::<BTreeSet<_>>()
        .len();
    2 * hits >= gold.len()
}

/// Gold quads of a sentence with their target token ranges.
pub fn gold_for_sentence(sentence: &ReviewSentence) -> Result<Vec<GoldQuad>, EvalError> {
    let tokens = tokenize(&sentence.text);
    sentence
        .opinions
        .iter()
        .map(|op| {
            let range = match &op.target {
                Some(span) => Some(align_target(&tokens, span.start, span.end).map_err(|e| {
                    LabelingError::Sentence {
                        sentence_id: sentence.id.clone(),
                        source: Box::new(e),
                    }
                })?),
                None => None,
            };
            Ok(GoldQuad {
                quad: Quad::from(op),
                tokens: range,
            })
        })
        .collect()
}

fn targets_match(gold: &GoldQuad, pred: &PredQuad, regime: Regime) -> bool {
    match regime {
        Regime::Token => match (&gold.tokens, &pred.quad.target, &pred.tokens) {
            (None, None, _) => true,
            (Some(range), Some(_), Some(slots)) => overlap_correct(range, &slots.clone().collect::<Vec<_>>()),
            _ => false,
        },
        Regime::Generative => match (&gold.quad.target, &pred.quad.target) {
            (None, None) => true,
            (Some(g), Some(p)) => g.trim().to_lowercase() == p.trim().to_lowercase(),
            _ => false,
        },
    }
}

fn keys_match(gold: &Quad, pred: &Quad, mode: ScoreMode) -> bool {
    match mode {
        ScoreMode::Easte => {
            gold.entity == pred.entity && gold.aspect == pred.aspect && gold.sentiment == pred.sentiment
        }
        ScoreMode::Tasd => {
            let (g, p) = (chain_tasd(gold), chain_tasd(pred));
            g.category == p.category && g.sentiment == p.sentiment
        }
        ScoreMode::ElementEntity => gold.entity == pred.entity,
        ScoreMode::ElementAspect => gold.aspect == pred.aspect,
        ScoreMode::ElementSentiment => gold.sentiment == pred.sentiment,
    }
}

/// Whether `pred` may be paired with `gold` under `mode`.
pub fn compatible(gold: &GoldQuad, pred: &PredQuad, mode: EvalMode) -> bool {
    keys_match(&gold.quad, &pred.quad, mode.mode) && targets_match(gold, pred, mode.regime)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MatchResult {
    /// `(gold index, pred index)` pairs, sorted by gold index.
    pub matched: Vec<(usize, usize)>,
    pub unmatched_gold: Vec<usize>,
    pub unmatched_pred: Vec<usize>,
}

/// One-to-one matching of maximum size. Gold quads are first paired
/// greedily in order with the first free compatible prediction, then
/// augmenting paths repair any pairing the greedy pass got wrong.
pub fn match_quads(gold: &[GoldQuad], pred: &[PredQuad], mode: EvalMode) -> MatchResult {
    let edges: Vec<Vec<usize>> = gold
        .iter()
        .map(|g| (0..pred.len()).filter(|&p| compatible(g, &pred[p], mode)).collect())
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; pred.len()];
    let mut partner: Vec<Option<usize>> = vec![None; gold.len()];
    for (g, adj) in edges.iter().enumerate() {
        if let Some(&p) = adj.iter().find(|&&p| owner[p].is_none()) {
            owner[p] = Some(g);
            partner[g] = Some(p);
        }
    }
    for g in 0..gold.len() {
        if partner[g].is_none() {
            let mut seen = vec![false; pred.len()];
            augment(g, &edges, &mut owner, &mut partner, &mut seen);
        }
    }
    let matched: Vec<(usize, usize)> = partner
        .iter()
        .enumerate()
        .filter_map(|(g, p)| p.map(|p| (g, p)))
        .collect();
    MatchResult {
        unmatched_gold: (0..gold.len()).filter(|&g| partner[g].is_none()).collect(),
        unmatched_pred: (0..pred.len()).filter(|&p| owner[p].is_none()).collect(),
        matched,
    }
}

fn augment(
    g: usize,
    edges: &[Vec<usize>],
    owner: &mut [Option<usize>],
    partner: &mut [Option<usize>],
    seen: &mut [bool],
) -> bool {
    for &p in &edges[g] {
        if seen[p] {
            continue;
        }
        seen[p] = true;
        let free = match owner[p] {
            None => true,
            Some(other) => augment(other, edges, owner, partner, seen),
        };
        if free {
            owner[p] = Some(g);
            partner[g] = Some(p);
            return true;
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentenceReport {
    pub id: String,
    pub gold: usize,
    pub pred: usize,
    pub matched: usize,
    pub missed: Vec<Quad>,
    pub spurious: Vec<Quad>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub mode: ScoreMode,
    pub regime: Regime,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched: usize,
    pub gold_total: usize,
    pub pred_total: usize,
    pub per_sentence: Vec<SentenceReport>,
}

/// `x` as a percentage with two decimals.
pub fn percent(x: f64) -> String {
    format!("{:.2}", x * 100.0)
}

impl EvalReport {
    pub fn summary_line(&self) -> String {
        format!(
            "P={} R={} F1={}",
            percent(self.precision),
            percent(self.recall),
            percent(self.f1)
        )
    }

    /// Header plus one summary row.
    pub fn csv(&self) -> String {
        format!(
            "mode,regime,precision,recall,f1,matched,gold_total,pred_total\n{},{},{},{},{},{},{},{}\n",
            self.mode.name(),
            self.regime.name(),
            percent(self.precision),
            percent(self.recall),
            percent(self.f1),
            self.matched,
            self.gold_total,
            self.pred_total
        )
    }
}

/// Precision, recall and F1 from totals. A ratio with a zero denominator
/// is 1 when both totals are zero and 0 otherwise.
pub fn prf(matched: usize, gold_total: usize, pred_total: usize) -> (f64, f64, f64) {
    let ratio = |num: usize, den: usize| match den {
        0 if gold_total == 0 && pred_total == 0 => 1.0,
        0 => 0.0,
        _ => num as f64 / den as f64,
    };
    let p = ratio(matched, pred_total);
    let r = ratio(matched, gold_total);
    let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    (p, r, f1)
}

/// Micro-averaged scores over every gold sentence. Sentences without a
/// prediction entry count as predicting nothing.
pub fn score(gold: &Corpus, predictions: &[SentencePrediction], mode: EvalMode) -> Result<EvalReport, EvalError> {
    let mut by_id: HashMap<&str, &SentencePrediction> = HashMap::new();
    for p in predictions {
        if gold.get(&p.id).is_none() {
            return Err(EvalError::UnknownSentence(p.id.clone()));
        }
        if by_id.insert(&p.id, p).is_some() {
            return Err(EvalError::DuplicatePrediction(p.id.clone()));
        }
    }
    let mut per_sentence = Vec::with_capacity(gold.len());
    let (mut matched, mut gold_total, mut pred_total) = (0, 0, 0);
    for sentence in &gold.sentences {
        let g = gold_for_sentence(sentence)?;
        let p: &[PredQuad] = by_id.get(sentence.id.as_str()).map_or(&[], |p| &p.quads);
        let m = match_quads(&g, p, mode);
        matched += m.matched.len();
        gold_total += g.len();
        pred_total += p.len();
        per_sentence.push(SentenceReport {
            id: sentence.id.clone(),
            gold: g.len(),
            pred: p.len(),
            matched: m.matched.len(),
            missed: m.unmatched_gold.iter().map(|&i| g[i].quad.clone()).collect(),
            spurious: m.unmatched_pred.iter().map(|&i| p[i].quad.clone()).collect(),
        });
    }
    let (precision, recall, f1) = prf(matched, gold_total, pred_total);
    Ok(EvalReport {
        mode: mode.mode,
        regime: mode.regime,
        precision,
        recall,
        f1,
        matched,
        gold_total,
        pred_total,
        per_sentence,
    })
}
