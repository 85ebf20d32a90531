use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::{forward, loss_and_grad, Gradients};
use super::params::{init_model, ModelParams};
use super::vocab::Vocabulary;
use super::{ModelConfig, ModelError, ModelSpec, TrainConfig};
use crate::corpus::{Corpus, Head, LabelInventory, ReviewSentence};
use crate::labeling::{
    decode_labels, decode_with_spans, encode_labels, tokenize, DecodedQuad, Quad, TokenLabeling,
    Triple,
};

/// A trained classifier together with everything needed to apply it.
#[derive(Debug, Clone, PartialEq)]
pub struct Tagger {
    pub vocab: Vocabulary,
    pub inventory: LabelInventory,
    pub params: ModelParams,
}

impl Tagger {
    pub fn config(&self) -> &ModelConfig {
        &self.params.config
    }
}

/// Token ids of one sentence and the gold class of every slot per head.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub ids: Vec<u32>,
    pub gold: Vec<[usize; 3]>,
}

impl Instance {
    pub fn from_sentence(
        sentence: &ReviewSentence,
        vocab: &Vocabulary,
        inventory: &LabelInventory,
    ) -> Result<Self, ModelError> {
        let encoded = encode_labels(sentence).map_err(|e| ModelError::Input(e.to_string()))?;
        for c in &encoded.collisions {
            log::debug!(
                "sentence {}: opinion {} not encodable (slot {} already holds {:?})",
                c.sentence_id,
                c.opinion_index,
                c.slot,
                c.existing
            );
        }
        Ok(Instance {
            ids: vocab.encode(&encoded.labeling.tokens),
            gold: gold_classes(&encoded.labeling, inventory)?,
        })
    }
}

/// Class index per head for every slot: 0 for NONE, `i + 1` for the
/// `i`-th inventory member.
pub fn gold_classes(
    labeling: &TokenLabeling,
    inventory: &LabelInventory,
) -> Result<Vec<[usize; 3]>, ModelError> {
    labeling
        .labels
        .iter()
        .map(|label| match label {
            None => Ok([0, 0, 0]),
            Some(t) => {
                let class = |head: Head, value: &str| {
                    inventory
                        .index_of(head, value)
                        .map(|i| i + 1)
                        .ok_or_else(|| ModelError::Input(format!("unknown {} {value:?}", head.name())))
                };
                Ok([
                    class(Head::Entity, &t.entity)?,
                    class(Head::Aspect, &t.aspect)?,
                    class(Head::Sentiment, &t.sentiment)?,
                ])
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub joint: f64,
    pub entity: f64,
    pub aspect: f64,
    pub sentiment: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub tagger: Tagger,
    pub history: Vec<EpochLoss>,
}

/// Plain mini-batch SGD over shuffled sentences.
///
/// The vocabulary is built from `corpus`. Each epoch visits every sentence
/// once in an order drawn from `tconfig.shuffle_seed`; a batch's gradient
/// is the mean of its sentence gradients. The recorded losses are the mean
/// pre-update losses of the epoch's sentences.
pub fn train(
    corpus: &Corpus,
    spec: ModelSpec,
    tconfig: &TrainConfig,
) -> Result<TrainOutcome, ModelError> {
    tconfig.validate()?;
    if corpus.is_empty() {
        return Err(ModelError::Input("training corpus is empty".into()));
    }
    let vocab = Vocabulary::from_corpus(corpus);
    let config = ModelConfig::new(vocab.len(), spec, &corpus.inventory)?;
    let instances = corpus
        .sentences
        .iter()
        .map(|s| Instance::from_sentence(s, &vocab, &corpus.inventory))
        .collect::<Result<Vec<_>, _>>()?;

    let mut params = init_model(&config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(tconfig.shuffle_seed);
    let mut order: Vec<usize> = (0..instances.len()).collect();
    let mut history = Vec::with_capacity(tconfig.epochs);
    let mut step = 0;

    for epoch in 0..tconfig.epochs {
        order.shuffle(&mut rng);
        let mut sums = [0.0f64; 4];
        for batch in order.chunks(tconfig.batch_size) {
            let mut acc = Gradients::zeros_like(&params);
            for &i in batch {
                let inst = &instances[i];
                let (loss, g) = loss_and_grad(&params, &inst.ids, &inst.gold)?;
                sums[0] += loss.joint;
                for h in 0..3 {
                    sums[h + 1] += loss.per_head[h];
                }
                acc.add_scaled(&g, 1.0 / batch.len() as f64);
            }
            if let Some(name) = acc.0.first_non_finite() {
                return Err(ModelError::Numeric {
                    tensor: name.to_string(),
                    epoch,
                    step,
                    history,
                });
            }
            for (p, g) in params.data.iter_mut().zip(&acc.0.data) {
                *p -= tconfig.learning_rate * g;
            }
            step += 1;
        }
        let n = instances.len() as f64;
        let record = EpochLoss {
            epoch,
            joint: sums[0] / n,
            entity: sums[1] / n,
            aspect: sums[2] / n,
            sentiment: sums[3] / n,
        };
        log::info!(
            "epoch {epoch}: joint {:.5} (entity {:.5}, aspect {:.5}, sentiment {:.5})",
            record.joint,
            record.entity,
            record.aspect,
            record.sentiment
        );
        history.push(record);
    }

    Ok(TrainOutcome {
        tagger: Tagger {
            vocab,
            inventory: corpus.inventory.clone(),
            params,
        },
        history,
    })
}

/// Arg-max labeling of `text`. A slot whose heads disagree on NONE-ness is
/// reset to NONE.
pub fn predict_labeling(tagger: &Tagger, text: &str) -> Result<TokenLabeling, ModelError> {
    let mut labeling = TokenLabeling::empty(text);
    let ids = tagger.vocab.encode(&labeling.tokens);
    let logits = forward(&tagger.params, &ids)?;
    let inv = &tagger.inventory;
    for (slot, label) in labeling.labels.iter_mut().enumerate() {
        let [e, a, s] = logits.argmax(slot);
        if e == 0 || a == 0 || s == 0 {
            continue;
        }
        *label = Some(Triple {
            entity: inv.entities()[e - 1].clone(),
            aspect: inv.aspects()[a - 1].clone(),
            sentiment: inv.sentiments()[s - 1].clone(),
        });
    }
    Ok(labeling)
}

pub fn predict_quads(tagger: &Tagger, sentence: &ReviewSentence) -> Result<Vec<Quad>, ModelError> {
    Ok(decode_labels(&predict_labeling(tagger, &sentence.text)?))
}

/// Predicted quads with the token range each target was decoded from.
pub fn predict_with_spans(tagger: &Tagger, text: &str) -> Result<Vec<DecodedQuad>, ModelError> {
    Ok(decode_with_spans(&predict_labeling(tagger, text)?))
}

/// Fraction of slots (sentinel included) whose predicted label equals the
/// encoded gold label.
pub fn token_accuracy(tagger: &Tagger, corpus: &Corpus) -> Result<f64, ModelError> {
    let mut correct = 0usize;
    let mut total = 0usize;
    for s in &corpus.sentences {
        let gold = encode_labels(s).map_err(|e| ModelError::Input(e.to_string()))?.labeling;
        let pred = predict_labeling(tagger, &s.text)?;
        debug_assert_eq!(tokenize(&s.text).len() + 1, pred.slot_count());
        total += gold.slot_count();
        correct += gold
            .labels
            .iter()
            .zip(&pred.labels)
            .filter(|(g, p)| g == p)
            .count();
    }
    Ok(if total == 0 { 1.0 } else { correct as f64 / total as f64 })
}
