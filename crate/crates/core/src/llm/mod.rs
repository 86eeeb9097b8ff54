//! Chat-completion gateway used by the revisor, critic and grounding roles.
//!
//! Three backend kinds sit behind [`ChatBackend`]: a live OpenAI-compatible
//! HTTP client, a replay backend that serves recorded transcripts, and
//! scripted backends wrapping plain Rust closures.

mod ensemble;
mod http;
mod replay;
mod scripted;

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use ensemble::{sample_critic_backend, CriticEnsemble, CriticEnsembleSpec, EnsembleMember};
pub use http::{http_attempts, HttpBackend, API_KEY_ENV};
pub use replay::{request_hash, RecordingBackend, ReplayBackend, TranscriptEntry};
pub use scripted::{ScriptRegistry, ScriptedBackend};

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("no recorded response for request {hash}")]
    ReplayMiss { hash: String },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("invalid backend config: {0}")]
    Config(String),
    #[error("transcript {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Http,
    Replay,
    Scripted,
}

fn default_timeout_ms() -> u64 {
    60_000
}

fn default_retries() -> u32 {
    2
}

/// Serializable description of a backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendSpec {
    pub kind: BackendKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<PathBuf>,
    /// Name of a registered script (scripted kind only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script: Option<String>,
}

impl BackendSpec {
    pub fn http(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        BackendSpec {
            kind: BackendKind::Http,
            endpoint: Some(endpoint.into()),
            model: Some(model.into()),
            temperature: 0.0,
            timeout_ms: default_timeout_ms(),
            retries: default_retries(),
            transcript: None,
            script: None,
        }
    }

    pub fn replay(transcript: impl Into<PathBuf>) -> Self {
        BackendSpec {
            kind: BackendKind::Replay,
            transcript: Some(transcript.into()),
            endpoint: None,
            model: None,
            ..BackendSpec::http("", "")
        }
    }

    pub fn scripted(script: impl Into<String>) -> Self {
        BackendSpec {
            kind: BackendKind::Scripted,
            script: Some(script.into()),
            endpoint: None,
            model: None,
            ..BackendSpec::http("", "")
        }
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(LlmError::Config(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        let nonempty = |o: &Option<String>| o.as_deref().is_some_and(|s| !s.is_empty());
        match self.kind {
            BackendKind::Http if !nonempty(&self.endpoint) || !nonempty(&self.model) => Err(
                LlmError::Config("http backend requires endpoint and model".into()),
            ),
            BackendKind::Replay if self.transcript.is_none() => Err(LlmError::Config(
                "replay backend requires a transcript path".into(),
            )),
            BackendKind::Scripted if !nonempty(&self.script) => Err(LlmError::Config(
                "scripted backend requires a script name".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Short human label for logs and traces.
    pub fn label(&self) -> String {
        match self.kind {
            BackendKind::Http => format!("http:{}", self.model.as_deref().unwrap_or("?")),
            BackendKind::Replay => format!(
                "replay:{}",
                self.transcript
                    .as_ref()
                    .and_then(|p| p.file_name())
                    .map(|f| f.to_string_lossy().into_owned())
                    .unwrap_or_default()
            ),
            BackendKind::Scripted => format!("scripted:{}", self.script.as_deref().unwrap_or("?")),
        }
    }

    /// Resolves relative transcript paths against `base`.
    pub fn resolve_paths(&mut self, base: &std::path::Path) {
        if let Some(t) = &self.transcript {
            if t.is_relative() {
                self.transcript = Some(base.join(t));
            }
        }
    }
}

/// Anything that can answer a chat request.
pub trait ChatBackend: Send + Sync {
    fn respond(&self, messages: &[ChatMessage]) -> Result<String, LlmError>;

    fn label(&self) -> String;
}

pub type SharedBackend = Arc<dyn ChatBackend>;

fn check_request(messages: &[ChatMessage]) -> Result<(), LlmError> {
    if messages.is_empty() {
        return Err(LlmError::InvalidRequest("no messages".into()));
    }
    if let Some(m) = messages
        .iter()
        .find(|m| m.role != Role::System && m.content.trim().is_empty())
    {
        return Err(LlmError::InvalidRequest(format!(
            "empty {:?} message",
            m.role
        )));
    }
    Ok(())
}

/// Sends `messages` and returns the assistant reply.
pub fn complete(
    backend: &dyn ChatBackend,
    messages: &[ChatMessage],
) -> Result<ChatMessage, LlmError> {
    check_request(messages)?;
    let content = backend.respond(messages)?;
    log::debug!("{} replied with {} bytes", backend.label(), content.len());
    Ok(ChatMessage::assistant(content))
}

/// Instantiates a backend from its spec. Scripted kinds are looked up in
/// `scripts`.
pub fn connect(spec: &BackendSpec, scripts: &ScriptRegistry) -> Result<SharedBackend, LlmError> {
    spec.validate()?;
    match spec.kind {
        BackendKind::Http => Ok(Arc::new(HttpBackend::new(spec)?)),
        BackendKind::Replay => Ok(Arc::new(ReplayBackend::open(
            spec.transcript.as_ref().expect("validated"),
        )?)),
        BackendKind::Scripted => {
            let name = spec.script.as_deref().expect("validated");
            scripts
                .get(name)
                .ok_or_else(|| LlmError::Config(format!("no script registered as {name:?}")))
        }
    }
}
