use std::collections::BTreeMap;

use serde::Serialize;

use super::{Corpus, Head, Split};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StatsReport {
    pub split: Split,
    pub sentences: usize,
    pub opinions: usize,
    pub implicit_targets: usize,
    pub multi_opinion_sentences: usize,
    pub entities: BTreeMap<String, usize>,
    pub aspects: BTreeMap<String, usize>,
    pub sentiments: BTreeMap<String, usize>,
}

/// Frequency tables over a corpus. Every inventory member appears in its
/// table, with zero when unused.
pub fn corpus_stats(corpus: &Corpus) -> StatsReport {
    let table = |head: Head| -> BTreeMap<String, usize> {
        corpus
            .inventory
            .members(head)
            .iter()
            .map(|m| (m.clone(), 0))
            .collect()
    };
    let mut report = StatsReport {
        split: corpus.split,
        sentences: corpus.sentences.len(),
        opinions: 0,
        implicit_targets: 0,
        multi_opinion_sentences: 0,
        entities: table(Head::Entity),
        aspects: table(Head::Aspect),
        sentiments: table(Head::Sentiment),
    };
    for s in &corpus.sentences {
        report.opinions += s.opinions.len();
        if s.opinions.len() > 1 {
            report.multi_opinion_sentences += 1;
        }
        for op in &s.opinions {
            if op.is_implicit() {
                report.implicit_targets += 1;
            }
            *report.entities.entry(op.entity.clone()).or_default() += 1;
            *report.aspects.entry(op.aspect.clone()).or_default() += 1;
            *report.sentiments.entry(op.sentiment.clone()).or_default() += 1;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::super::{LabelInventory, Opinion, ReviewSentence, TargetSpan};
    use super::*;

    #[test]
    fn running_example_counts() {
        let c = Corpus::new(
            Split::Train,
            vec![ReviewSentence {
                id: "s".into(),
                text: "The food arrived 20 minutes after I called, cold and soggy.".into(),
                opinions: vec![
                    Opinion {
                        target: None,
                        entity: "SERVICE".into(),
                        aspect: "GENERAL".into(),
                        sentiment: "negative".into(),
                    },
                    Opinion {
                        target: Some(TargetSpan { start: 4, end: 8, surface: "food".into() }),
                        entity: "FOOD".into(),
                        aspect: "QUALITY".into(),
                        sentiment: "negative".into(),
                    },
                ],
            }],
            LabelInventory::default(),
        )
        .unwrap();
        let r = corpus_stats(&c);
        assert_eq!(r.sentences, 1);
        assert_eq!(r.opinions, 2);
        assert_eq!(r.implicit_targets, 1);
        assert_eq!(r.multi_opinion_sentences, 1);
        assert_eq!(r.entities["FOOD"], 1);
        assert_eq!(r.entities["DRINKS"], 0);
        assert_eq!(r.sentiments["negative"], 2);
        assert_eq!(r.entities.values().sum::<usize>(), r.opinions);
        assert_eq!(r.aspects.values().sum::<usize>(), r.opinions);
        assert_eq!(r.sentiments.values().sum::<usize>(), r.opinions);
    }
}
