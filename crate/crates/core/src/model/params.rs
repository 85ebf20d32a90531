use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Context, ModelConfig, ModelError};

/// Name, shape and fan-in of one parameter tensor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorSpec {
    pub name: String,
    pub shape: Vec<usize>,
    #[serde(skip)]
    pub(crate) offset: usize,
    #[serde(skip)]
    pub(crate) fan_in: usize,
}

impl TensorSpec {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

pub(crate) const HEAD_NAMES: [&str; 3] = ["entity", "aspect", "sentiment"];

/// Tensor layout for a config, in storage order.
pub(crate) fn layout(config: &ModelConfig) -> Vec<TensorSpec> {
    let d = config.embed_dim;
    let mut specs: Vec<(String, Vec<usize>, usize)> = vec![
        // An embedding row is selected by a one-hot input, so fan-in is 1.
        ("embeddings".into(), vec![config.vocab_size, d], 1),
        ("sentinel".into(), vec![d], 1),
    ];
    if config.context == Context::SelfAttention {
        for name in ["attn_query", "attn_key", "attn_value"] {
            specs.push((name.into(), vec![d, d], d));
        }
    }
    for (name, &k) in HEAD_NAMES.iter().zip(&config.head_sizes) {
        specs.push((format!("head_{name}_weight"), vec![d, k], d));
        specs.push((format!("head_{name}_bias"), vec![k], d));
    }
    let mut offset = 0;
    specs
        .into_iter()
        .map(|(name, shape, fan_in)| {
            let spec = TensorSpec {
                name,
                shape,
                offset,
                fan_in,
            };
            offset += spec.len();
            spec
        })
        .collect()
}

/// All trainable parameters as one flat buffer plus its tensor layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub(crate) specs: Vec<TensorSpec>,
    pub(crate) data: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(config: ModelConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let specs = layout(&config);
        let total = specs.last().map_or(0, |s| s.offset + s.len());
        Ok(ModelParams {
            config,
            specs,
            data: vec![0.0; total],
        })
    }

    pub fn from_flat(config: ModelConfig, data: Vec<f64>) -> Result<Self, ModelError> {
        let mut p = ModelParams::zeros(config)?;
        if data.len() != p.data.len() {
            return Err(ModelError::Shape(format!(
                "expected {} parameters, got {}",
                p.data.len(),
                data.len()
            )));
        }
        p.data = data;
        Ok(p)
    }

    pub fn specs(&self) -> &[TensorSpec] {
        &self.specs
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn tensor(&self, name: &str) -> Option<&[f64]> {
        self.specs
            .iter()
            .find(|s| s.name == name)
            .map(|s| &self.data[s.range()])
    }

    pub fn tensor_mut(&mut self, name: &str) -> Option<&mut [f64]> {
        let range = self.specs.iter().find(|s| s.name == name)?.range();
        Some(&mut self.data[range])
    }

    pub(crate) fn slice(&self, index: usize) -> &[f64] {
        &self.data[self.specs[index].range()]
    }

    pub(crate) fn index_of(&self, name: &str) -> usize {
        self.specs
            .iter()
            .position(|s| s.name == name)
            .expect("tensor present in layout")
    }

    /// First tensor holding a non-finite value.
    pub fn first_non_finite(&self) -> Option<&str> {
        self.specs
            .iter()
            .find(|s| self.data[s.range()].iter().any(|v| !v.is_finite()))
            .map(|s| s.name.as_str())
    }
}

/// Draws every tensor from U(-1/sqrt(fan_in), 1/sqrt(fan_in)) with a
/// ChaCha8 stream seeded by `config.seed`.
pub fn init_model(config: &ModelConfig) -> Result<ModelParams, ModelError> {
    let mut params = ModelParams::zeros(*config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for spec in &params.specs {
        let bound = 1.0 / (spec.fan_in as f64).sqrt();
        for v in &mut params.data[spec.range()] {
            *v = rng.gen_range(-bound..bound);
        }
    }
    Ok(params)
}

/// `params - learning_rate * grads`, elementwise.
pub fn sgd_step(
    params: &ModelParams,
    grads: &super::Gradients,
    learning_rate: f64,
) -> Result<ModelParams, ModelError> {
    if params.config != grads.0.config || params.data.len() != grads.0.data.len() {
        return Err(ModelError::Shape("gradients do not match parameters".into()));
    }
    if let Some(name) = grads.0.first_non_finite() {
        return Err(ModelError::Numeric {
            tensor: name.to_string(),
            epoch: 0,
            step: 0,
            history: Vec::new(),
        });
    }
    let mut next = params.clone();
    for (p, g) in next.data.iter_mut().zip(&grads.0.data) {
        *p -= learning_rate * g;
    }
    Ok(next)
}
