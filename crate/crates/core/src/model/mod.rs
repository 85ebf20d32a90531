//! A small three-head token classifier trained with the unified loss.
//!
//! The encoder is deliberately tiny: learned word embeddings, a learned
//! sentinel embedding for the sentence-level slot, and either one
//! single-head self-attention layer with a residual connection or a
//! bag-of-words context average. On top sit three linear heads (entity,
//! aspect, sentiment), each with a NONE class at index 0. The training
//! objective is the mean of the three per-head cross-entropies.
//!
//! Parameters are kept in `f64`; checkpoints store little-endian `f32`.

mod checkpoint;
mod gradcheck;
mod network;
mod params;
mod train;
mod vocab;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Head, LabelInventory};

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointError};
pub use gradcheck::gradient_check;
pub use network::{
    forward, forward_batch, grad, grad_with_head_weights, joint_loss, softmax, Gradients,
    HeadLogits, LossBreakdown,
};
pub use params::{init_model, sgd_step, ModelParams, TensorSpec};
pub use train::{
    gold_classes, predict_labeling, predict_quads, predict_with_spans, token_accuracy, train,
    EpochLoss, Instance, Tagger, TrainOutcome,
};
pub use vocab::{Vocabulary, UNK};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model configuration: {0}")]
    Config(String),
    #[error("token id {id} outside vocabulary of size {size}")]
    Vocabulary { id: usize, size: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value in {tensor} at epoch {epoch}, step {step}")]
    Numeric {
        tensor: String,
        epoch: usize,
        step: usize,
        /// Loss history up to the failing epoch.
        history: Vec<EpochLoss>,
    },
    #[error("invalid input: {0}")]
    Input(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Context {
    /// Each slot adds the mean of all slot embeddings.
    Bag,
    /// One single-head scaled dot-product self-attention layer.
    #[default]
    SelfAttention,
}

pub const DEFAULT_EMBED_DIM: usize = 64;
pub const MIN_EMBED_DIM: usize = 8;

/// User-facing architecture choices; vocabulary and head sizes are derived
/// from the training corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub embed_dim: usize,
    pub context: Context,
    pub seed: u64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            embed_dim: DEFAULT_EMBED_DIM,
            context: Context::SelfAttention,
            seed: 0,
        }
    }
}

/// Fully resolved model configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub context: Context,
    /// Entity, aspect, sentiment head widths, NONE included.
    pub head_sizes: [usize; 3],
    pub seed: u64,
}

impl ModelConfig {
    pub fn new(
        vocab_size: usize,
        spec: ModelSpec,
        inventory: &LabelInventory,
    ) -> Result<Self, ModelError> {
        let config = ModelConfig {
            vocab_size,
            embed_dim: spec.embed_dim,
            context: spec.context,
            head_sizes: Head::ALL.map(|h| inventory.head_size(h)),
            seed: spec.seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.vocab_size == 0 {
            return Err(ModelError::Config("vocab_size must be positive".into()));
        }
        if self.embed_dim < MIN_EMBED_DIM {
            return Err(ModelError::Config(format!(
                "embed_dim must be at least {MIN_EMBED_DIM}, got {}",
                self.embed_dim
            )));
        }
        if self.head_sizes.iter().any(|&k| k < 2) {
            return Err(ModelError::Config(format!(
                "every head needs NONE plus at least one label, got {:?}",
                self.head_sizes
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub shuffle_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 50,
            learning_rate: 1e-3,
            batch_size: 1,
            shuffle_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.epochs == 0 {
            return Err(ModelError::Config("epochs must be positive".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(ModelError::Config("learning_rate must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(ModelError::Config("batch_size must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_rejects_small_embedding() {
        let spec = ModelSpec {
            embed_dim: 4,
            ..ModelSpec::default()
        };
        assert!(matches!(
            ModelConfig::new(10, spec, &LabelInventory::default()),
            Err(ModelError::Config(_))
        ));
    }

    #[test]
    fn head_sizes_follow_inventory() {
        let c = ModelConfig::new(10, ModelSpec::default(), &LabelInventory::default()).unwrap();
        assert_eq!(c.head_sizes, [7, 6, 4]);
    }

    #[test]
    fn train_config_defaults_and_validation() {
        let t = TrainConfig::default();
        assert_eq!((t.epochs, t.learning_rate, t.batch_size), (50, 1e-3, 1));
        assert!(TrainConfig { epochs: 0, ..t }.validate().is_err());
        assert!(TrainConfig { batch_size: 0, ..t }.validate().is_err());
        assert!(TrainConfig { learning_rate: 0.0, ..t }.validate().is_err());
    }
}
