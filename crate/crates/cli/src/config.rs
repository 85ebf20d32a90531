use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Every setting a command may use. Values come from flags first, then
/// the `--config` TOML file, then command defaults; the resolved result is
/// embedded in each artifact a command writes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,

    pub input: Option<PathBuf>,
    pub inventory: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub split: Option<String>,
    pub stats_out: Option<PathBuf>,

    pub corpus: Option<PathBuf>,
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub batch: Option<usize>,
    pub seed: Option<u64>,
    pub embed_dim: Option<usize>,
    pub context: Option<String>,
    pub checkpoint_out: Option<PathBuf>,
    pub history_out: Option<PathBuf>,

    pub checkpoint: Option<PathBuf>,
    pub template: Option<String>,
    pub shots: Option<usize>,
    pub pool: Option<PathBuf>,
    pub sentence: Option<String>,
    pub fixtures: Option<PathBuf>,
    pub endpoint_config: Option<PathBuf>,
    pub run_log: Option<PathBuf>,
    pub max_inflight: Option<usize>,

    pub gold: Option<PathBuf>,
    pub pred: Option<PathBuf>,
    pub mode: Option<String>,
    pub regime: Option<String>,
    pub csv_out: Option<PathBuf>,
}

macro_rules! merge_fields {
    ($a:ident, $b:ident; $($f:ident),*) => {
        RunConfig { $($f: $a.$f.or($b.$f)),* }
    };
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = read_text(path)?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config file {}: {e}", path.display())))
    }

    /// Field-wise `self` if set, else `fallback`.
    pub fn or(self, fallback: RunConfig) -> RunConfig {
        let (a, b) = (self, fallback);
        merge_fields!(a, b; command, input, inventory, out, split, stats_out, corpus, epochs, lr,
            batch, seed, embed_dim, context, checkpoint_out, history_out, checkpoint, template,
            shots, pool, sentence, fixtures, endpoint_config, run_log, max_inflight, gold, pred,
            mode, regime, csv_out)
    }

    /// JSON form with unset fields left out.
    pub fn to_json(&self) -> serde_json::Value {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let serde_json::Value::Object(map) = &mut value {
            map.retain(|_, v| !v.is_null());
        }
        value
    }

    /// `# run_config: {...}` line for CSV artifacts.
    pub fn csv_comment(&self) -> String {
        format!("# run_config: {}\n", self.to_json())
    }
}

pub fn require<T: Clone>(value: &Option<T>, flag: &str) -> Result<T, CliError> {
    value
        .clone()
        .ok_or_else(|| CliError::Usage(format!("--{flag} is required")))
}

/// An input path that must exist.
pub fn existing(path: &Path) -> Result<&Path, CliError> {
    if path.exists() {
        Ok(path)
    } else {
        Err(CliError::Usage(format!("{}: no such file or directory", path.display())))
    }
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(existing(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    String::from_utf8(read_bytes(path)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON value serializes");
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

/// `path` with `suffix` appended to its file name.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}
