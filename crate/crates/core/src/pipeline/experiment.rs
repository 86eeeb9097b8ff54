use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::PipelineConfig;
use super::fixture;
use super::formalize::{Formalization, Formalizer};
use super::PipelineError;
use crate::critic::{CriticTreeConfig, PromptTemplates};
use crate::crl::{
    evaluate_agreement, read_episodes, train_with, validate_episodes, Agreement, Episode,
    LearningCurve,
};
use crate::engine::ReasoningTrace;
use crate::llm::{connect, LlmError, ScriptRegistry, SharedBackend};
use crate::metrics::{corpus_bleu, decision_distributions, ltl_match_accuracy, DistributionReport};
use crate::rules::{
    Compiler, EmbeddingProvider, FallbackEmbedder, HashedTrigramEmbedder,
    HttpEmbedder, KnowledgeBase, OutcomeReport, ProductionRule, PromptMode,
};
use crate::scenario::{
    default_policy, experience_texts, generate, read_corpus, scenario_kb, Archetype,
    ExperienceText,
};

/// Connected model backends of an experiment.
#[derive(Clone)]
pub struct Backends {
    pub revisor: SharedBackend,
    pub critics: Vec<(SharedBackend, f64)>,
    pub translator: Option<SharedBackend>,
    pub grounding: Option<SharedBackend>,
    pub repair: Option<SharedBackend>,
}

impl Backends {
    pub fn connect(cfg: &PipelineConfig, scripts: &ScriptRegistry) -> Result<Self, LlmError> {
        let tree = cfg.resolved_tree();
        let optional = |spec: &Option<crate::llm::BackendSpec>| {
            spec.as_ref()
                .map(|s| connect(&cfg.resolved_backend(s), scripts))
                .transpose()
        };
        Ok(Backends {
            revisor: connect(&tree.revisor, scripts)?,
            critics: tree
                .critics
                .members
                .iter()
                .map(|m| Ok((connect(&m.backend, scripts)?, m.probability)))
                .collect::<Result<_, LlmError>>()?,
            translator: optional(&cfg.translator)?,
            grounding: optional(&cfg.grounding)?,
            repair: optional(&cfg.repair)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationScores {
    /// Segments with a gold formula.
    pub scored: usize,
    pub acc_initial: f64,
    pub acc_refined: f64,
    pub bleu_initial: f64,
    pub bleu_refined: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub archetype: Archetype,
    pub prompt_mode: PromptMode,
    pub segments: usize,
    pub outcomes: OutcomeReport,
    pub rules: usize,
    pub translation: TranslationScores,
    pub episodes: usize,
    pub epochs: usize,
    pub agreement_before: Agreement,
    pub agreement_after: Agreement,
    /// Mean JS divergence over the most frequent states.
    pub js_before: f64,
    pub js_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub critics: u64,
    pub scenario: u64,
    pub train: u64,
    pub eval: u64,
}

/// Hashes of the config and of every artifact. Contains no timestamps, so
/// two runs with the same inputs produce the same manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub config_sha256: String,
    pub seeds: Seeds,
    pub files: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Everything an experiment produced, in memory.
pub struct ExperimentOutput {
    pub report: ExperimentReport,
    pub formalization: Formalization,
    pub episodes: Vec<Episode>,
    pub trained: Vec<ProductionRule>,
    pub curve: LearningCurve,
    pub distributions: DistributionReport,
    pub trace: ReasoningTrace,
}

/// A configured experiment with its knowledge base and backends.
pub struct Experiment {
    pub cfg: PipelineConfig,
    pub kb: KnowledgeBase,
    pub backends: Backends,
    pub provider: Arc<dyn EmbeddingProvider>,
}

impl Experiment {
    /// Validates `cfg` and connects its backends; scripted backends may
    /// name the fixture scripts.
    pub fn new(cfg: PipelineConfig) -> Result<Self, PipelineError> {
        cfg.validate()?;
        let kb = load_kb(&cfg)?;
        let backends = Backends::connect(&cfg, &fixture::registry(&kb))?;
        Ok(Self::with_backends(cfg, kb, backends))
    }

    pub fn with_backends(cfg: PipelineConfig, kb: KnowledgeBase, backends: Backends) -> Self {
        let provider: Arc<dyn EmbeddingProvider> = match &cfg.embedding {
            Some(e) => match HttpEmbedder::new(&e.endpoint, &e.model, e.dim, Duration::from_millis(e.timeout_ms)) {
                Ok(primary) => Arc::new(FallbackEmbedder {
                    primary,
                    fallback: HashedTrigramEmbedder { dim: e.dim },
                }),
                Err(err) => {
                    log::warn!("embedding client unavailable ({err}); using hashed trigrams");
                    Arc::new(HashedTrigramEmbedder { dim: e.dim })
                }
            },
            None => Arc::new(HashedTrigramEmbedder::default()),
        };
        Experiment {
            cfg,
            kb,
            backends,
            provider,
        }
    }

    pub fn corpus(&self) -> Result<Vec<ExperienceText>, PipelineError> {
        let texts = match &self.cfg.corpus {
            Some(p) => read_corpus(&self.cfg.resolve(p))?,
            None => experience_texts(self.cfg.archetype),
        };
        if texts.is_empty() {
            return Err(PipelineError::Config("corpus is empty".into()));
        }
        if self.backends.translator.is_none() {
            if let Some(t) = texts.iter().find(|t| t.initial.is_none()) {
                return Err(PipelineError::Config(format!(
                    "segment {} has no initial translation and no translator is configured",
                    t.id
                )));
            }
        }
        Ok(texts)
    }

    pub fn compiler(&self) -> Compiler {
        let mut c = Compiler::new(self.kb.clone(), self.provider.clone()).with_options(self.cfg.compile);
        if let Some(g) = &self.backends.grounding {
            c = c.with_drafter(g.clone(), self.cfg.prompt_mode);
        }
        if let Some(r) = &self.backends.repair {
            c = c.with_repair(r.clone());
        }
        c
    }

    pub fn formalizer(&self) -> Result<Formalizer, PipelineError> {
        let spec = self.cfg.resolved_tree();
        let templates = match &spec.templates_dir {
            Some(dir) => PromptTemplates::load_dir(dir).map_err(|source| PipelineError::Io {
                path: dir.clone(),
                source,
            })?,
            None => PromptTemplates::minimal(),
        };
        Ok(Formalizer {
            compiler: self.compiler(),
            tree: CriticTreeConfig {
                num_critics: spec.num_critics,
                max_depth: spec.max_depth,
                fallback_best: spec.fallback_best,
                templates,
                vocabulary: self.kb.vocabulary(),
            },
            revisor: self.backends.revisor.clone(),
            critics: self.backends.critics.clone(),
            critic_seed: spec.critics.seed,
            translator: self.backends.translator.clone(),
            jobs: self.cfg.jobs,
        })
    }

    /// Loads or generates the episodes and checks them against the
    /// knowledge base.
    pub fn episodes(&self) -> Result<Vec<Episode>, PipelineError> {
        let episodes = match &self.cfg.episodes {
            Some(p) => read_episodes(&self.cfg.resolve(p))?,
            None => {
                let policy = self
                    .cfg
                    .policy
                    .clone()
                    .unwrap_or_else(|| default_policy(self.cfg.archetype));
                generate(&self.cfg.scenario_spec(), &policy).map_err(PipelineError::Config)?
            }
        };
        validate_episodes(&episodes, &self.kb)?;
        Ok(episodes)
    }

    /// Formalize, train and evaluate, in memory.
    pub fn execute(&self) -> Result<ExperimentOutput, PipelineError> {
        let texts = self.corpus()?;
        let episodes = self.episodes()?;
        let formalization = self.formalizer()?.run(&texts);
        let rules = formalization.store.rules();
        log::info!(
            "{} of {} segments became rules",
            rules.len(),
            texts.len()
        );

        let cfg = &self.cfg;
        let engine = cfg.train.engine();
        let distributions = |rules: &[ProductionRule]| {
            decision_distributions(rules, &episodes, &engine, cfg.eval.seed, cfg.eval.samples)
        };
        let agreement_before = evaluate_agreement(&rules, &episodes, &engine, cfg.eval.seed, cfg.eval.runs);
        let js_before = distributions(&rules).mean_js();
        let (trained, curve) = train_with(&rules, &episodes, &cfg.train, |epoch, rules| {
            let js = distributions(rules).mean_js();
            log::info!("epoch {epoch}: mean JS {js:.4}");
            Some(js)
        })?;
        let agreement_after = evaluate_agreement(&trained, &episodes, &engine, cfg.eval.seed, cfg.eval.runs);
        let final_distributions = distributions(&trained);

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.eval.seed);
        let mut trace = ReasoningTrace::default();
        if let Some(ep) = episodes.first() {
            for step in &ep.steps {
                trace.entries.extend(engine.decide(&step.state, &trained, &mut rng).1.entries);
            }
        }

        let report = ExperimentReport {
            archetype: cfg.archetype,
            prompt_mode: cfg.prompt_mode,
            segments: texts.len(),
            outcomes: formalization.report(),
            rules: rules.len(),
            translation: translation_scores(&formalization),
            episodes: episodes.len(),
            epochs: cfg.train.epochs,
            agreement_before,
            agreement_after,
            js_before,
            js_after: final_distributions.mean_js(),
        };
        Ok(ExperimentOutput {
            report,
            formalization,
            episodes,
            trained,
            curve,
            distributions: final_distributions,
            trace,
        })
    }

    /// Runs the experiment and writes every artifact plus `manifest.json`
    /// into `out`.
    pub fn run(&self, out: &Path) -> Result<(ExperimentReport, Manifest), PipelineError> {
        let output = self.execute()?;
        let manifest = write_artifacts(&self.cfg, &output, out)?;
        Ok((output.report, manifest))
    }
}

pub fn load_kb(cfg: &PipelineConfig) -> Result<KnowledgeBase, PipelineError> {
    Ok(match &cfg.knowledge_base {
        Some(p) => KnowledgeBase::load(&cfg.resolve(p))?,
        None => scenario_kb(cfg.archetype),
    })
}

fn translation_scores(f: &Formalization) -> TranslationScores {
    let scored: Vec<_> = f.records.iter().filter(|r| r.reference.is_some()).collect();
    let text = |o: &Option<String>| o.clone().unwrap_or_default();
    let refs: Vec<String> = scored.iter().map(|r| text(&r.reference)).collect();
    let initial: Vec<String> = scored.iter().map(|r| text(&r.initial)).collect();
    let refined: Vec<String> = scored.iter().map(|r| text(&r.refined)).collect();
    TranslationScores {
        scored: scored.len(),
        acc_initial: ltl_match_accuracy(&initial, &refs),
        acc_refined: ltl_match_accuracy(&refined, &refs),
        bleu_initial: corpus_bleu(&initial, &refs),
        bleu_refined: corpus_bleu(&refined, &refs),
    }
}

fn jsonl<T: Serialize>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|i| serde_json::to_string(&i).expect("artifact serializes") + "\n")
        .collect()
}

pub const MANIFEST: &str = "manifest.json";

fn write_artifacts(
    cfg: &PipelineConfig,
    output: &ExperimentOutput,
    out: &Path,
) -> Result<Manifest, PipelineError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| PipelineError::Io { path, source }
    };
    fs::create_dir_all(out).map_err(io(out))?;
    let f = &output.formalization;
    let artifacts: Vec<(&str, String)> = vec![
        ("formalization.jsonl", jsonl(&f.records)),
        ("critic_trees.jsonl", jsonl(&f.trees)),
        ("outcomes.csv", f.report().to_csv()),
        ("rules_compiled.json", f.store.to_json()),
        ("episodes.jsonl", crate::crl::to_jsonl(&output.episodes)),
        ("rules_trained.json", pretty(&output.trained)),
        ("learning_curve.csv", output.curve.to_csv()),
        ("js_states.csv", output.distributions.to_csv()),
        ("reasoning_trace.jsonl", output.trace.to_jsonl()),
        ("metrics.json", pretty(&output.report)),
    ];
    let mut files = BTreeMap::new();
    for (name, content) in &artifacts {
        let path = out.join(name);
        fs::write(&path, content).map_err(io(&path))?;
        files.insert(name.to_string(), sha256_hex(content.as_bytes()));
    }
    let manifest = Manifest {
        tool: format!("cogform {}", env!("CARGO_PKG_VERSION")),
        config_sha256: sha256_hex(cfg.canonical_json().as_bytes()),
        seeds: Seeds {
            critics: cfg.critic_tree.critics.seed,
            scenario: cfg.scenario_spec().seed,
            train: cfg.train.seed,
            eval: cfg.eval.seed,
        },
        files,
    };
    let path = out.join(MANIFEST);
    fs::write(&path, pretty(&manifest)).map_err(io(&path))?;
    Ok(manifest)
}

fn pretty<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("artifact serializes") + "\n"
}
