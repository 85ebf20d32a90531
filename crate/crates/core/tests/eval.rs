#[path = "support/oracle.rs"]
mod oracle;

use easte::corpus::{LabelInventory, Opinion, ReviewSentence, Split, TargetSpan};
use easte::eval::*;
use easte::Corpus;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn agrees_with_exhaustive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..200 {
        let (gold, preds) = oracle::random_case(&mut rng, 4, 8);
        for mode in EvalMode::all() {
            let got = score(&gold, &preds, mode).unwrap();
            let want = oracle::oracle_score(&gold, &preds, mode.mode(), mode.regime());
            assert_eq!(
                (got.matched, got.gold_total, got.pred_total, got.precision, got.recall, got.f1),
                (want.matched, want.gold_total, want.pred_total, want.precision, want.recall, want.f1),
                "case {case} {mode}"
            );
        }
    }
}

#[test]
fn overlap_threshold_sweep() {
    for len in 1..=6usize {
        let gold = 3..3 + len;
        for mask in 0u32..(1 << (len + 4)) {
            // Tokens 1..len+5 so some predictions fall outside the range.
            let predicted: Vec<usize> = (0..len + 4).filter(|b| mask & (1 << b) != 0).map(|b| b + 1).collect();
            let inside = predicted.iter().filter(|t| gold.contains(t)).count();
            assert_eq!(
                overlap_correct(&gold, &predicted),
                inside as f64 / len as f64 >= 0.5,
                "{gold:?} {predicted:?}"
            );
        }
    }
}

fn sentence(id: &str, text: &str, ops: &[(Option<(usize, usize)>, &str, &str, &str)]) -> ReviewSentence {
    ReviewSentence {
        id: id.into(),
        text: text.into(),
        opinions: ops
            .iter()
            .map(|(span, e, a, s)| Opinion {
                target: span.map(|(start, end)| TargetSpan {
                    start,
                    end,
                    surface: text.chars().skip(start).take(end - start).collect(),
                }),
                entity: e.to_string(),
                aspect: a.to_string(),
                sentiment: s.to_string(),
            })
            .collect(),
    }
}

fn as_predictions(corpus: &Corpus) -> Vec<SentencePrediction> {
    corpus
        .sentences
        .iter()
        .map(|s| SentencePrediction {
            id: s.id.clone(),
            quads: gold_for_sentence(s)
                .unwrap()
                .into_iter()
                .map(|g| PredQuad {
                    quad: g.quad,
                    tokens: g.tokens,
                })
                .collect(),
        })
        .collect()
}

#[test]
fn three_gold_two_correct() {
    let corpus = Corpus::new(
        Split::Test,
        vec![sentence(
            "s",
            "The food was lousy - too sweet or too salty and the portions tiny.",
            &[
                (Some((4, 8)), "FOOD", "QUALITY", "negative"),
                (Some((52, 60)), "FOOD", "STYLE_OPTIONS", "negative"),
                (None, "SERVICE", "GENERAL", "negative"),
            ],
        )],
        LabelInventory::default(),
    )
    .unwrap();
    let mut preds = as_predictions(&corpus);
    preds[0].quads.pop();
    let report = score(&corpus, &preds, EvalMode::new(ScoreMode::Easte, Regime::Token).unwrap()).unwrap();
    assert_eq!(report.summary_line(), "P=100.00 R=66.67 F1=80.00");
    assert_eq!(report.per_sentence[0].missed.len(), 1);
    assert!(report.csv().ends_with("easte,token,100.00,66.67,80.00,2,3,2\n"));
}

#[test]
fn unknown_and_duplicate_ids_are_rejected() {
    let corpus = Corpus::new(Split::Test, vec![sentence("a", "x", &[])], LabelInventory::default()).unwrap();
    let mode = EvalMode::new(ScoreMode::Easte, Regime::Generative).unwrap();
    let p = |id: &str| SentencePrediction { id: id.into(), quads: vec![] };
    assert!(matches!(score(&corpus, &[p("b")], mode), Err(EvalError::UnknownSentence(_))));
    assert!(matches!(score(&corpus, &[p("a"), p("a")], mode), Err(EvalError::DuplicatePrediction(_))));
    let r = score(&corpus, &[], mode).unwrap();
    assert_eq!((r.precision, r.recall, r.f1), (1.0, 1.0, 1.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn invariants(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (gold, mut preds) = oracle::random_case(&mut rng, 3, 6);
        let token = |m| EvalMode::new(m, Regime::Token).unwrap();
        let easte = score(&gold, &preds, token(ScoreMode::Easte)).unwrap();
        for mode in EvalMode::all() {
            let r = score(&gold, &preds, mode).unwrap();
            for v in [r.precision, r.recall, r.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            if r.precision > 0.0 && r.recall > 0.0 {
                prop_assert!(r.f1 <= r.precision.max(r.recall) + 1e-12);
                prop_assert!(r.f1 >= r.precision.min(r.recall) - 1e-12);
            }
            prop_assert!(r.matched <= r.gold_total.min(r.pred_total));
            if mode.regime() == Regime::Token {
                prop_assert!(r.matched >= easte.matched);
            }
            let itself = score(&gold, &as_predictions(&gold), mode).unwrap();
            prop_assert_eq!(itself.f1, 1.0);
        }
        // Order of sentences and of quads inside a sentence does not matter.
        let before: Vec<_> = EvalMode::all().into_iter().map(|m| score(&gold, &preds, m).unwrap().matched).collect();
        preds.shuffle(&mut rng);
        for p in &mut preds {
            p.quads.shuffle(&mut rng);
        }
        let after: Vec<_> = EvalMode::all().into_iter().map(|m| score(&gold, &preds, m).unwrap().matched).collect();
        prop_assert_eq!(before, after);
    }
}
