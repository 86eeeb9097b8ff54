use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::critic::CriticTreeSpec;
use crate::crl::TrainConfig;
use crate::llm::BackendSpec;
use crate::rules::{CompileOptions, PromptMode};
use crate::scenario::{Archetype, ReferencePolicy, ScenarioSpec};

/// Remote embedding service; the hashed trigram embedder of the same
/// dimension takes over when it fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSpec {
    pub endpoint: String,
    pub model: String,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_timeout")]
    pub timeout_ms: u64,
}

fn default_dim() -> usize {
    256
}

fn default_timeout() -> u64 {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    /// Passes over the episodes when measuring agreement.
    pub runs: usize,
    /// Engine samples per state for decision distributions; the state's
    /// reference count when absent.
    pub samples: Option<usize>,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            runs: 5,
            samples: None,
            seed: 0,
        }
    }
}

/// One experiment. Relative paths are resolved against the directory of
/// the config file and stored unresolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub archetype: Archetype,
    /// Knowledge base JSON; the archetype's built-in one when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knowledge_base: Option<PathBuf>,
    /// Experience-text corpus; the bundled one when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
    #[serde(default)]
    pub prompt_mode: PromptMode,
    pub critic_tree: CriticTreeSpec,
    /// Produces initial translations for segments that lack one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translator: Option<BackendSpec>,
    /// Writes rule text from formulas; direct rendering when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grounding: Option<BackendSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repair: Option<BackendSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<EmbeddingSpec>,
    #[serde(default)]
    pub compile: CompileOptions,
    /// Pre-built episode file; generated from `scenario` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub episodes: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioSpec>,
    /// Reference drivers; the archetype's default mixture when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<ReferencePolicy>,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_jobs() -> usize {
    1
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: PipelineConfig = serde_json::from_str(&text)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn from_value(value: serde_json::Value, base_dir: &Path) -> Result<Self, PipelineError> {
        let mut cfg: PipelineConfig =
            serde_json::from_value(value).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    /// Sets every random stream of the experiment from one seed.
    pub fn set_seed(&mut self, seed: u64) {
        self.critic_tree.critics.seed = seed;
        self.train.seed = seed;
        self.eval.seed = seed;
        self.scenario_spec_mut().seed = seed;
    }

    fn scenario_spec_mut(&mut self) -> &mut ScenarioSpec {
        let archetype = self.archetype;
        self.scenario
            .get_or_insert_with(|| ScenarioSpec::new(archetype, 0))
    }

    pub fn scenario_spec(&self) -> ScenarioSpec {
        self.scenario
            .clone()
            .unwrap_or_else(|| ScenarioSpec::new(self.archetype, 0))
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_relative() {
            self.base_dir.join(path)
        } else {
            path.to_path_buf()
        }
    }

    /// Backend specs with transcript paths made absolute.
    pub fn resolved_backend(&self, spec: &BackendSpec) -> BackendSpec {
        let mut spec = spec.clone();
        spec.resolve_paths(&self.base_dir);
        spec
    }

    pub fn resolved_tree(&self) -> CriticTreeSpec {
        let mut spec = self.critic_tree.clone();
        spec.resolve_paths(&self.base_dir);
        spec
    }

    /// Field checks plus existence of every referenced file.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.jobs == 0 {
            return bad("jobs must be >= 1".into());
        }
        if self.eval.runs == 0 {
            return bad("eval.runs must be >= 1".into());
        }
        if self.eval.samples == Some(0) {
            return bad("eval.samples must be >= 1".into());
        }
        let tree = self.resolved_tree();
        tree.validate()?;
        self.train.validate()?;
        let mut paths: Vec<PathBuf> = [&self.knowledge_base, &self.corpus, &self.episodes]
            .into_iter()
            .flatten()
            .map(|p| self.resolve(p))
            .collect();
        paths.extend(tree.templates_dir.clone());
        let backends = [&self.translator, &self.grounding, &self.repair]
            .into_iter()
            .flatten()
            .map(|b| self.resolved_backend(b))
            .chain(std::iter::once(tree.revisor.clone()))
            .chain(tree.critics.members.iter().map(|m| m.backend.clone()));
        for b in backends {
            b.validate()?;
            paths.extend(b.transcript);
        }
        if let Some(p) = paths.iter().find(|p| !p.exists()) {
            return bad(format!("referenced path {} does not exist", p.display()));
        }
        if let Some(s) = &self.scenario {
            if s.archetype != self.archetype {
                return bad(format!(
                    "scenario archetype {} differs from experiment archetype {}",
                    s.archetype, self.archetype
                ));
            }
            s.validate().map_err(PipelineError::Config)?;
        }
        Ok(())
    }

    /// Compact JSON of the config with `jobs` pinned to 1, used for the
    /// manifest hash.
    pub fn canonical_json(&self) -> String {
        let mut cfg = self.clone();
        cfg.jobs = 1;
        serde_json::to_string(&cfg).expect("config serializes")
    }
}
