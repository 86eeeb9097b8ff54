use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::embed::{cosine, EmbeddingProvider, HashedTrigramEmbedder};
use super::rule::{ProductionRule, RuleBody};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DedupConfig {
    /// Cosine similarity at or above which two names count as duplicates.
    pub threshold: f64,
    /// How many nearest stored names are compared.
    pub top_k: usize,
}

impl Default for DedupConfig {
    fn default() -> Self {
        DedupConfig {
            threshold: 0.9,
            top_k: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "snake_case")]
pub enum DedupDecision {
    Pass,
    Duplicate { existing: String, similarity: f64 },
}

impl DedupDecision {
    pub fn is_duplicate(&self) -> bool {
        matches!(self, DedupDecision::Duplicate { .. })
    }
}

/// Embeds `text`, falling back to hashed trigrams if the provider fails.
pub fn embed_or_fallback(provider: &dyn EmbeddingProvider, text: &str) -> Vec<f64> {
    match provider.embed(text) {
        Ok(v) => v,
        Err(e) => {
            log::warn!("embedding failed for {text:?} ({e}); using hashed trigrams");
            HashedTrigramEmbedder {
                dim: provider.dimension(),
            }
            .vector(text)
        }
    }
}

fn decide<'a>(
    body: &RuleBody,
    vector: &[f64],
    stored: impl Iterator<Item = (&'a ProductionRule, &'a [f64])>,
    cfg: &DedupConfig,
) -> DedupDecision {
    let mut scored = Vec::new();
    for (i, (rule, emb)) in stored.enumerate() {
        let sim = cosine(vector, emb);
        if rule.body().canonical() == *body {
            return DedupDecision::Duplicate {
                existing: rule.name.clone(),
                similarity: sim,
            };
        }
        scored.push((sim, i, rule));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    match scored.iter().take(cfg.top_k).find(|(sim, _, _)| *sim >= cfg.threshold) {
        Some((sim, _, rule)) => DedupDecision::Duplicate {
            existing: rule.name.clone(),
            similarity: *sim,
        },
        None => DedupDecision::Pass,
    }
}

/// Compares `candidate` with `store`: body-identical rules are duplicates
/// outright, otherwise the `top_k` most similar names by cosine are checked
/// against the threshold.
pub fn dedup_check(
    candidate: &ProductionRule,
    store: &[ProductionRule],
    provider: &dyn EmbeddingProvider,
    cfg: &DedupConfig,
) -> DedupDecision {
    let v = embed_or_fallback(provider, &candidate.name);
    let embs: Vec<Vec<f64>> = store
        .iter()
        .map(|r| embed_or_fallback(provider, &r.name))
        .collect();
    decide(
        &candidate.body().canonical(),
        &v,
        store.iter().zip(embs.iter().map(Vec::as_slice)),
        cfg,
    )
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: std::path::PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

struct Entry {
    rule: ProductionRule,
    embedding: Vec<f64>,
}

/// Insertion-ordered rule collection. [`RuleStore::admit`] checks and
/// inserts under one lock, so concurrent compilers see a consistent
/// snapshot.
#[derive(Default)]
pub struct RuleStore {
    entries: Mutex<Vec<Entry>>,
}

impl RuleStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Admits `rule` unless it duplicates a stored one.
    pub fn admit(
        &self,
        rule: ProductionRule,
        provider: &dyn EmbeddingProvider,
        cfg: &DedupConfig,
    ) -> DedupDecision {
        let embedding = embed_or_fallback(provider, &rule.name);
        let mut entries = self.entries.lock().expect("rule store lock poisoned");
        let decision = decide(
            &rule.body().canonical(),
            &embedding,
            entries.iter().map(|e| (&e.rule, e.embedding.as_slice())),
            cfg,
        );
        if decision == DedupDecision::Pass {
            entries.push(Entry { rule, embedding });
        }
        decision
    }

    /// Read-only dedup check against the current contents.
    pub fn check(
        &self,
        rule: &ProductionRule,
        provider: &dyn EmbeddingProvider,
        cfg: &DedupConfig,
    ) -> DedupDecision {
        let embedding = embed_or_fallback(provider, &rule.name);
        let entries = self.entries.lock().expect("rule store lock poisoned");
        decide(
            &rule.body().canonical(),
            &embedding,
            entries.iter().map(|e| (&e.rule, e.embedding.as_slice())),
            cfg,
        )
    }

    pub fn rules(&self) -> Vec<ProductionRule> {
        let entries = self.entries.lock().expect("rule store lock poisoned");
        entries.iter().map(|e| e.rule.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("rule store lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.rules()).expect("rules serialize")
    }

    pub fn write_json(&self, path: &Path) -> Result<(), StoreError> {
        std::fs::write(path, self.to_json() + "\n").map_err(|source| StoreError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

pub fn read_rules(path: &Path) -> Result<Vec<ProductionRule>, StoreError> {
    let text = std::fs::read_to_string(path).map_err(|source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| StoreError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_rules(path: &Path, rules: &[ProductionRule]) -> Result<(), StoreError> {
    let text = serde_json::to_string_pretty(rules).expect("rules serialize");
    std::fs::write(path, text + "\n").map_err(|source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    })
}
