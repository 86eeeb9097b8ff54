use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum EmbedError {
    #[error("embedding transport error: {0}")]
    Transport(String),
    #[error("embedding protocol error: {0}")]
    Protocol(String),
}

/// Maps rule names to unit-norm vectors.
pub trait EmbeddingProvider: Send + Sync {
    fn embed(&self, text: &str) -> Result<Vec<f64>, EmbedError>;

    fn dimension(&self) -> usize;
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Hashed character-trigram counts, L2-normalized. Pure and offline.
#[derive(Debug, Clone, Copy)]
pub struct HashedTrigramEmbedder {
    pub dim: usize,
}

impl Default for HashedTrigramEmbedder {
    fn default() -> Self {
        HashedTrigramEmbedder { dim: 256 }
    }
}

impl HashedTrigramEmbedder {
    pub fn vector(&self, text: &str) -> Vec<f64> {
        let chars: Vec<char> = text.chars().collect();
        let mut v = vec![0.0; self.dim];
        if chars.len() < 3 {
            if !chars.is_empty() {
                v[(fnv1a(text.as_bytes()) % self.dim as u64) as usize] += 1.0;
            }
        } else {
            for w in chars.windows(3) {
                let gram: String = w.iter().collect();
                v[(fnv1a(gram.as_bytes()) % self.dim as u64) as usize] += 1.0;
            }
        }
        normalize(v)
    }
}

impl EmbeddingProvider for HashedTrigramEmbedder {
    fn embed(&self, text: &str) -> Result<Vec<f64>, EmbedError> {
        Ok(self.vector(text))
    }

    fn dimension(&self) -> usize {
        self.dim
    }
}

/// Client for OpenAI-compatible `/v1/embeddings` endpoints.
pub struct HttpEmbedder {
    url: String,
    model: String,
    dim: usize,
    client: reqwest::blocking::Client,
    api_key: Option<String>,
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingDatum>,
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    embedding: Vec<f64>,
}

impl HttpEmbedder {
    pub fn new(endpoint: &str, model: &str, dim: usize, timeout: Duration) -> Result<Self, EmbedError> {
        let base = endpoint.trim_end_matches('/');
        let url = if base.ends_with("/embeddings") {
            base.to_string()
        } else if base.ends_with("/v1") {
            format!("{base}/embeddings")
        } else {
            format!("{base}/v1/embeddings")
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| EmbedError::Transport(e.to_string()))?;
        Ok(HttpEmbedder {
            url,
            model: model.to_string(),
            dim,
            client,
            api_key: std::env::var(crate::llm::API_KEY_ENV).ok(),
        })
    }
}

impl EmbeddingProvider for HttpEmbedder {
    fn embed(&self, text: &str) -> Result<Vec<f64>, EmbedError> {
        let mut req = self
            .client
            .post(&self.url)
            .json(&json!({"model": self.model, "input": text}));
        if let Some(k) = &self.api_key {
            req = req.bearer_auth(k);
        }
        let resp = req.send().map_err(|e| EmbedError::Transport(e.to_string()))?;
        if !resp.status().is_success() {
            return Err(EmbedError::Transport(format!("HTTP {}", resp.status())));
        }
        let body: EmbeddingResponse = resp
            .json()
            .map_err(|e| EmbedError::Protocol(e.to_string()))?;
        let v = body
            .data
            .into_iter()
            .next()
            .ok_or_else(|| EmbedError::Protocol("empty data".into()))?
            .embedding;
        if v.len() != self.dim {
            return Err(EmbedError::Protocol(format!(
                "expected dimension {}, got {}",
                self.dim,
                v.len()
            )));
        }
        Ok(normalize(v))
    }

    fn dimension(&self) -> usize {
        self.dim
    }
}

/// Uses `primary` and falls back to hashed trigrams when it fails.
pub struct FallbackEmbedder<P> {
    pub primary: P,
    pub fallback: HashedTrigramEmbedder,
}

impl<P: EmbeddingProvider> EmbeddingProvider for FallbackEmbedder<P> {
    fn embed(&self, text: &str) -> Result<Vec<f64>, EmbedError> {
        match self.primary.embed(text) {
            Ok(v) => Ok(v),
            Err(e) => {
                log::warn!("embedding provider failed ({e}); using hashed trigrams");
                self.fallback.embed(text)
            }
        }
    }

    fn dimension(&self) -> usize {
        self.fallback.dim
    }
}
