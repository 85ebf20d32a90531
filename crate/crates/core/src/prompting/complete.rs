use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompletionSource {
    Endpoint,
    Fixture,
}

/// A raw model answer, kept byte for byte.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub prompt_hash: String,
    pub raw_text: String,
    pub source: CompletionSource,
}

#[derive(Debug, Error)]
pub enum CompletionError {
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("endpoint rejected the request with status {status}: {body}")]
    Rejected { status: u16, body: String },
    #[error("unexpected endpoint response: {0}")]
    Response(String),
    #[error("no fixture for prompt digest {digest}")]
    MissingFixture { digest: String },
    #[error("endpoint configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Hex SHA-256 of the prompt bytes; fixture files are named `<digest>.txt`.
pub fn prompt_digest(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RequestStyle {
    /// `{model, <prompt_field>: prompt, ...parameters}`
    #[default]
    Input,
    /// `{model, <messages_field>: [{role: "user", content: prompt}], ...parameters}`
    Messages,
}

/// HTTP endpoint settings, normally read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    pub url: String,
    pub model: String,
    #[serde(default = "default_token_env")]
    pub token_env: String,
    #[serde(default)]
    pub style: RequestStyle,
    #[serde(default = "default_model_field")]
    pub model_field: String,
    #[serde(default = "default_prompt_field")]
    pub prompt_field: String,
    #[serde(default = "default_messages_field")]
    pub messages_field: String,
    /// JSON pointer to the generated text; defaults by request style.
    #[serde(default)]
    pub response_pointer: Option<String>,
    /// Total attempts, the first one included.
    #[serde(default = "default_max_attempts")]
    pub max_attempts: u32,
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    /// Decoding parameters copied into the request body.
    #[serde(default)]
    pub parameters: BTreeMap<String, serde_json::Value>,
}

fn default_token_env() -> String {
    "EASTE_API_TOKEN".into()
}
fn default_model_field() -> String {
    "model".into()
}
fn default_prompt_field() -> String {
    "input".into()
}
fn default_messages_field() -> String {
    "messages".into()
}
fn default_max_attempts() -> u32 {
    3
}
fn default_backoff_ms() -> u64 {
    500
}
fn default_timeout_secs() -> u64 {
    60
}

impl EndpointConfig {
    pub fn from_toml(text: &str) -> Result<Self, CompletionError> {
        let config: EndpointConfig =
            toml::from_str(text).map_err(|e| CompletionError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CompletionError> {
        if !(self.url.starts_with("http://") || self.url.starts_with("https://")) {
            return Err(CompletionError::Config(format!("url must be http(s), got {:?}", self.url)));
        }
        if self.model.is_empty() {
            return Err(CompletionError::Config("model must not be empty".into()));
        }
        if self.max_attempts == 0 {
            return Err(CompletionError::Config("max_attempts must be at least 1".into()));
        }
        if self.timeout_secs == 0 {
            return Err(CompletionError::Config("timeout_secs must be positive".into()));
        }
        Ok(())
    }

    fn pointer(&self) -> &str {
        match (&self.response_pointer, self.style) {
            (Some(p), _) => p,
            (None, RequestStyle::Input) => "/choices/0/text",
            (None, RequestStyle::Messages) => "/choices/0/message/content",
        }
    }

    fn body(&self, prompt: &str) -> serde_json::Value {
        let mut body = serde_json::Map::new();
        for (k, v) in &self.parameters {
            body.insert(k.clone(), v.clone());
        }
        body.insert(self.model_field.clone(), self.model.clone().into());
        match self.style {
            RequestStyle::Input => {
                body.insert(self.prompt_field.clone(), prompt.into());
            }
            RequestStyle::Messages => {
                body.insert(
                    self.messages_field.clone(),
                    serde_json::json!([{ "role": "user", "content": prompt }]),
                );
            }
        }
        serde_json::Value::Object(body)
    }
}

#[derive(Serialize)]
struct LogRecord<'a> {
    prompt_hash: &'a str,
    raw_text: &'a str,
    timestamp: f64,
    source: CompletionSource,
}

/// Append-only JSON-lines record of every completion; safe to share
/// between threads.
pub struct RunLog {
    out: Mutex<Box<dyn Write + Send>>,
}

impl RunLog {
    pub fn new(out: impl Write + Send + 'static) -> Self {
        RunLog {
            out: Mutex::new(Box::new(out)),
        }
    }

    pub fn append_to(path: &Path) -> Result<Self, CompletionError> {
        let file = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
        Ok(RunLog::new(file))
    }

    fn record(&self, completion: &Completion) -> Result<(), CompletionError> {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        let mut line = serde_json::to_string(&LogRecord {
            prompt_hash: &completion.prompt_hash,
            raw_text: &completion.raw_text,
            timestamp,
            source: completion.source,
        })
        .map_err(|e| CompletionError::Response(e.to_string()))?;
        line.push('\n');
        let mut out = self.out.lock().unwrap_or_else(|p| p.into_inner());
        out.write_all(line.as_bytes())?;
        out.flush()?;
        Ok(())
    }
}

enum Backend {
    Endpoint {
        config: EndpointConfig,
        agent: ureq::Agent,
        token: Option<String>,
    },
    Fixtures(PathBuf),
}

/// Source of completions: a live endpoint or a directory of fixtures.
pub struct Completer {
    backend: Backend,
    log: Option<RunLog>,
}

impl Completer {
    /// Reads the bearer token from `config.token_env` once, up front.
    pub fn endpoint(config: EndpointConfig) -> Result<Self, CompletionError> {
        config.validate()?;
        let token = std::env::var(&config.token_env).ok().filter(|t| !t.is_empty());
        if token.is_none() {
            log::warn!("{} is not set; requests are sent without a bearer token", config.token_env);
        }
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .build()
            .into();
        Ok(Completer {
            backend: Backend::Endpoint { config, agent, token },
            log: None,
        })
    }

    pub fn fixtures(dir: impl Into<PathBuf>) -> Result<Self, CompletionError> {
        let dir = dir.into();
        if !dir.is_dir() {
            return Err(CompletionError::Config(format!(
                "fixture directory {} does not exist",
                dir.display()
            )));
        }
        Ok(Completer {
            backend: Backend::Fixtures(dir),
            log: None,
        })
    }

    pub fn with_log(mut self, log: RunLog) -> Self {
        self.log = Some(log);
        self
    }

    pub fn complete(&self, prompt: &str) -> Result<Completion, CompletionError> {
        let digest = prompt_digest(prompt);
        let completion = match &self.backend {
            Backend::Fixtures(dir) => {
                let path = dir.join(format!("{digest}.txt"));
                let raw_text = match std::fs::read_to_string(&path) {
                    Ok(text) => text,
                    Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                        return Err(CompletionError::MissingFixture { digest });
                    }
                    Err(e) => return Err(e.into()),
                };
                Completion {
                    prompt_hash: digest,
                    raw_text,
                    source: CompletionSource::Fixture,
                }
            }
            Backend::Endpoint { config, agent, token } => Completion {
                raw_text: post_with_retries(config, agent, token.as_deref(), prompt)?,
                prompt_hash: digest,
                source: CompletionSource::Endpoint,
            },
        };
        if let Some(log) = &self.log {
            log.record(&completion)?;
        }
        Ok(completion)
    }
}

enum Attempt {
    Retry(String),
    Fail(CompletionError),
}

fn post_with_retries(
    config: &EndpointConfig,
    agent: &ureq::Agent,
    token: Option<&str>,
    prompt: &str,
) -> Result<String, CompletionError> {
    let body = config.body(prompt).to_string();
    let mut last = String::new();
    for attempt in 1..=config.max_attempts {
        if attempt > 1 {
            let delay = config.backoff_ms.saturating_mul(1 << (attempt - 2).min(16));
            std::thread::sleep(Duration::from_millis(delay));
        }
        match post_once(config, agent, token, &body) {
            Ok(text) => return Ok(text),
            Err(Attempt::Fail(e)) => return Err(e),
            Err(Attempt::Retry(message)) => {
                log::warn!("attempt {attempt}/{} failed: {message}", config.max_attempts);
                last = message;
            }
        }
    }
    Err(CompletionError::Transport {
        attempts: config.max_attempts,
        message: last,
    })
}

fn post_once(
    config: &EndpointConfig,
    agent: &ureq::Agent,
    token: Option<&str>,
    body: &str,
) -> Result<String, Attempt> {
    let mut request = agent
        .post(&config.url)
        .header("Content-Type", "application/json");
    if let Some(token) = token {
        request = request.header("Authorization", format!("Bearer {token}"));
    }
    let mut response = match request.send(body) {
        Ok(r) => r,
        Err(e @ (ureq::Error::Timeout(_) | ureq::Error::Io(_) | ureq::Error::ConnectionFailed)) => {
            return Err(Attempt::Retry(e.to_string()));
        }
        Err(e) => {
            return Err(Attempt::Fail(CompletionError::Transport {
                attempts: 1,
                message: e.to_string(),
            }))
        }
    };
    let status = response.status().as_u16();
    let text = match response.body_mut().read_to_string() {
        Ok(t) => t,
        Err(e @ (ureq::Error::Timeout(_) | ureq::Error::Io(_))) => return Err(Attempt::Retry(e.to_string())),
        Err(e) => return Err(Attempt::Fail(CompletionError::Response(e.to_string()))),
    };
    if status >= 500 {
        return Err(Attempt::Retry(format!("status {status}")));
    }
    if status >= 400 {
        return Err(Attempt::Fail(CompletionError::Rejected { status, body: text }));
    }
    let json: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Attempt::Fail(CompletionError::Response(e.to_string())))?;
    match json.pointer(config.pointer()) {
        Some(serde_json::Value::String(s)) => Ok(s.clone()),
        _ => Err(Attempt::Fail(CompletionError::Response(format!(
            "no string at {} in {text}",
            config.pointer()
        )))),
    }
}
