//! Checkpoint file layout:
//!
//! ```text
//! magic    8 bytes  "EASTECK\0"
//! version  u32 LE   1
//! hdr_len  u64 LE   length of the JSON header
//! header   JSON     {config, vocab, inventory, tensors: [{name, shape}], metadata}
//! data     f32 LE   every tensor in header order, row-major
//! ```

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::params::{ModelParams, TensorSpec};
use super::train::Tagger;
use super::vocab::Vocabulary;
use super::ModelConfig;
use crate::corpus::LabelInventory;

const MAGIC: &[u8; 8] = b"EASTECK\0";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint file (bad magic)")]
    Magic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("checkpoint header: {0}")]
    Header(#[from] serde_json::Error),
    #[error("checkpoint inconsistent: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Serialize, Deserialize)]
struct Header {
    config: ModelConfig,
    vocab: Vocabulary,
    inventory: LabelInventory,
    tensors: Vec<TensorSpec>,
    #[serde(default)]
    metadata: serde_json::Value,
}

/// Writes `tagger` with free-form `metadata` (e.g. the resolved run config).
pub fn save_checkpoint<W: Write>(
    tagger: &Tagger,
    metadata: &serde_json::Value,
    mut out: W,
) -> Result<(), CheckpointError> {
    let header = Header {
        config: tagger.params.config,
        vocab: tagger.vocab.clone(),
        inventory: tagger.inventory.clone(),
        tensors: tagger.params.specs().to_vec(),
        metadata: metadata.clone(),
    };
    let json = serde_json::to_vec(&header)?;
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(json.len() as u64).to_le_bytes())?;
    out.write_all(&json)?;
    let mut data = Vec::with_capacity(tagger.params.len() * 4);
    for &v in tagger.params.as_slice() {
        data.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out.write_all(&data)?;
    out.flush()?;
    Ok(())
}

/// Reads a checkpoint, validating every tensor shape against the config.
/// Returns the model and the stored metadata.
pub fn load_checkpoint<R: Read>(mut input: R) -> Result<(Tagger, serde_json::Value), CheckpointError> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CheckpointError::Magic);
    }
    let mut word = [0u8; 4];
    input.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != VERSION {
        return Err(CheckpointError::Version(version));
    }
    let mut len = [0u8; 8];
    input.read_exact(&mut len)?;
    let len = u64::from_le_bytes(len) as usize;
    let mut json = vec![0u8; len];
    input.read_exact(&mut json)?;
    let header: Header = serde_json::from_slice(&json)?;

    let mut params = ModelParams::zeros(header.config)
        .map_err(|e| CheckpointError::Inconsistent(e.to_string()))?;
    let expected: Vec<(&str, &[usize])> = params
        .specs()
        .iter()
        .map(|s| (s.name.as_str(), s.shape.as_slice()))
        .collect();
    let stored: Vec<(&str, &[usize])> = header
        .tensors
        .iter()
        .map(|s| (s.name.as_str(), s.shape.as_slice()))
        .collect();
    if expected != stored {
        return Err(CheckpointError::Inconsistent(format!(
            "tensor shapes {stored:?} do not match config {expected:?}"
        )));
    }
    if header.vocab.len() != header.config.vocab_size {
        return Err(CheckpointError::Inconsistent(format!(
            "vocabulary has {} entries, config says {}",
            header.vocab.len(),
            header.config.vocab_size
        )));
    }
    let sizes = crate::corpus::Head::ALL.map(|h| header.inventory.head_size(h));
    if sizes != header.config.head_sizes {
        return Err(CheckpointError::Inconsistent(format!(
            "inventory implies head sizes {sizes:?}, config says {:?}",
            header.config.head_sizes
        )));
    }

    let mut raw = Vec::new();
    input.read_to_end(&mut raw)?;
    if raw.len() != params.len() * 4 {
        return Err(CheckpointError::Inconsistent(format!(
            "expected {} bytes of tensor data, found {}",
            params.len() * 4,
            raw.len()
        )));
    }
    for (dst, chunk) in params.as_mut_slice().iter_mut().zip(raw.chunks_exact(4)) {
        let v = f32::from_le_bytes(chunk.try_into().expect("4-byte chunk"));
        if !v.is_finite() {
            return Err(CheckpointError::Inconsistent("non-finite parameter".into()));
        }
        *dst = v as f64;
    }
    Ok((
        Tagger {
            vocab: header.vocab,
            inventory: header.inventory,
            params,
        },
        header.metadata,
    ))
}
