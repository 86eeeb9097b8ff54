use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use super::{BackendSpec, ChatBackend, ChatMessage, LlmError};

/// Environment variable holding the bearer token for live endpoints.
pub const API_KEY_ENV: &str = "COGFORM_API_KEY";

static HTTP_ATTEMPTS: AtomicU64 = AtomicU64::new(0);

/// Number of HTTP requests attempted by this process so far.
pub fn http_attempts() -> u64 {
    HTTP_ATTEMPTS.load(Ordering::SeqCst)
}

/// Client for OpenAI-compatible `/v1/chat/completions` endpoints.
pub struct HttpBackend {
    url: String,
    model: String,
    temperature: f64,
    retries: u32,
    backoff: Duration,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ReplyMessage,
}

#[derive(Deserialize)]
struct ReplyMessage {
    content: Option<String>,
}

fn completions_url(endpoint: &str) -> String {
    let base = endpoint.trim_end_matches('/');
    if base.ends_with("/chat/completions") {
        base.to_string()
    } else if base.ends_with("/v1") {
        format!("{base}/chat/completions")
    } else {
        format!("{base}/v1/chat/completions")
    }
}

enum Attempt {
    Done(String),
    Retry(LlmError),
    Fatal(LlmError),
}

impl HttpBackend {
    pub fn new(spec: &BackendSpec) -> Result<Self, LlmError> {
        spec.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(spec.timeout_ms))
            .build()
            .map_err(|e| LlmError::Config(e.to_string()))?;
        Ok(HttpBackend {
            url: completions_url(spec.endpoint.as_deref().expect("validated")),
            model: spec.model.clone().expect("validated"),
            temperature: spec.temperature,
            retries: spec.retries,
            backoff: Duration::from_millis(250),
            api_key: std::env::var(API_KEY_ENV)
                .or_else(|_| std::env::var("OPENAI_API_KEY"))
                .ok(),
            client,
        })
    }

    /// Overrides the base delay between retries (doubled per attempt).
    pub fn with_backoff(mut self, backoff: Duration) -> Self {
        self.backoff = backoff;
        self
    }

    fn attempt(&self, messages: &[ChatMessage]) -> Attempt {
        HTTP_ATTEMPTS.fetch_add(1, Ordering::SeqCst);
        let body = json!({
            "model": self.model,
            "messages": messages,
            "temperature": self.temperature,
        });
        let mut req = self.client.post(&self.url).json(&body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = match req.send() {
            Ok(r) => r,
            Err(e) => return Attempt::Retry(LlmError::Transport(e.to_string())),
        };
        let status = resp.status();
        let text = match resp.text() {
            Ok(t) => t,
            Err(e) => return Attempt::Retry(LlmError::Transport(e.to_string())),
        };
        if status.as_u16() == 429 || status.is_server_error() {
            return Attempt::Retry(LlmError::Transport(format!("HTTP {status}: {text}")));
        }
        if !status.is_success() {
            return Attempt::Fatal(LlmError::Protocol(format!("HTTP {status}: {text}")));
        }
        let parsed: CompletionResponse = match serde_json::from_str(&text) {
            Ok(p) => p,
            Err(e) => return Attempt::Fatal(LlmError::Protocol(format!("bad body: {e}"))),
        };
        match parsed.choices.into_iter().next().and_then(|c| c.message.content) {
            Some(content) => Attempt::Done(content),
            None => Attempt::Fatal(LlmError::Protocol("reply has no message content".into())),
        }
    }
}

impl ChatBackend for HttpBackend {
    fn respond(&self, messages: &[ChatMessage]) -> Result<String, LlmError> {
        let mut last = None;
        for attempt in 0..=self.retries {
            if attempt > 0 {
                std::thread::sleep(self.backoff * 2u32.saturating_pow(attempt - 1));
            }
            match self.attempt(messages) {
                Attempt::Done(content) => return Ok(content),
                Attempt::Fatal(e) => return Err(e),
                Attempt::Retry(e) => {
                    log::warn!("{} attempt {} failed: {e}", self.url, attempt + 1);
                    last = Some(e);
                }
            }
        }
        Err(last.expect("at least one attempt"))
    }

    fn label(&self) -> String {
        format!("http:{}", self.model)
    }
}
