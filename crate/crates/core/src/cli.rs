//! Command-line front end. Machine-readable results go to stdout as JSON or
//! CSV, logs go to stderr, files are only written below `--out`.
//!
//! Exit codes: 0 success, 1 domain error (bad formula, config, data), 2
//! usage error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Parser, Subcommand};
use serde_json::json;

use crate::critic::CriticTree;
use crate::crl::{
    evaluate_agreement, read_episodes, to_jsonl, train_with, validate_episodes,
};
use crate::llm::{BackendSpec, CriticEnsemble};
use crate::ltl;
use crate::metrics::decision_distributions;
use crate::pipeline::{load_kb, Experiment, PipelineConfig, PipelineError};
use crate::rules::{outcome_report, read_rules, PromptMode, RuleStore};
use crate::scenario::{default_policy, generate, Archetype};

const DEFAULT_CONFIG: &str = include_str!("../fixtures/highway/scripted.json");

#[derive(Debug, Parser)]
#[command(name = "cogform", version, about = "Driving-rule formalization and utility learning")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for every random stream; required by stochastic subcommands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Experiment config JSON; the bundled scripted highway config when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Replaces every model backend: `scripted:<name>`, `replay:<transcript>`
    /// or `http:<model>@<endpoint>`.
    #[arg(long, global = true, value_parser = parse_backend)]
    backend: Option<BackendSpec>,
    /// Output directory; nothing is written when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Scenario archetype, overriding the config.
    #[arg(long, global = true)]
    archetype: Option<Archetype>,
    /// Worker threads for formalization.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse an LTL formula and print its canonical AST.
    Parse {
        /// LTL formula text.
        formula: String,
    },
    /// Decide whether an LTL formula can become a production rule.
    Classify {
        /// LTL formula text.
        formula: String,
    },
    /// Refine a candidate translation with the critic tree.
    Translate {
        /// Natural-language rule being translated.
        #[arg(long)]
        text: String,
        /// Candidate LTL translation to refine.
        #[arg(long)]
        initial: String,
    },
    /// Compile LTL formulas into production rules.
    Compile {
        /// LTL formula to compile (repeatable).
        #[arg(long = "formula")]
        formulas: Vec<String>,
        /// JSON array of formula strings.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Grounding prompt mode: `literal` or `supply`.
        #[arg(long, value_parser = parse_mode)]
        mode: Option<PromptMode>,
    },
    /// Generate reference episodes for the archetype.
    GenData {
        /// Number of episodes, overriding the config.
        #[arg(long)]
        episodes: Option<usize>,
        /// Reference decision noise, overriding the config.
        #[arg(long)]
        noise: Option<f64>,
    },
    /// Fit rule utilities to episodes.
    Train {
        /// Rule set JSON.
        #[arg(long)]
        rules: PathBuf,
        /// Episodes JSONL.
        #[arg(long)]
        episodes: PathBuf,
        /// Training epochs, overriding the config.
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Agreement and decision divergence of rules on episodes.
    Eval {
        /// Rule set JSON.
        #[arg(long)]
        rules: PathBuf,
        /// Episodes JSONL.
        #[arg(long)]
        episodes: PathBuf,
    },
    /// Formalize, train and evaluate in one go.
    RunAll {
        /// Grounding prompt mode: `literal` or `supply`.
        #[arg(long, value_parser = parse_mode)]
        mode: Option<PromptMode>,
    },
}

fn parse_mode(s: &str) -> std::result::Result<PromptMode, String> {
    serde_json::from_value(json!(s)).map_err(|_| format!("unknown prompt mode {s:?} (literal|supply)"))
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        domain(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Parses `--backend`.
pub fn parse_backend(s: &str) -> std::result::Result<BackendSpec, String> {
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| format!("backend {s:?} is not of the form <kind>:<target>"))?;
    match kind {
        "scripted" => Ok(BackendSpec::scripted(rest)),
        "replay" => {
            let path = std::env::current_dir().map_err(|e| e.to_string())?.join(rest);
            Ok(BackendSpec::replay(path))
        }
        "http" => {
            let (model, endpoint) = rest
                .split_once('@')
                .ok_or_else(|| "http backend must be http:<model>@<endpoint>".to_string())?;
            Ok(BackendSpec::http(endpoint, model))
        }
        _ => Err(format!("unknown backend kind {kind:?} (scripted|replay|http)")),
    }
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn stdout(text: &str) {
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            log::warn!("writing stdout failed: {e}");
        }
    }
}

fn emit(value: &serde_json::Value) {
    stdout(&(serde_json::to_string_pretty(value).expect("JSON value serializes") + "\n"));
}

impl Cli {
    fn config(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => {
                let value = serde_json::from_str(DEFAULT_CONFIG).expect("bundled config is JSON");
                PipelineConfig::from_value(value, &std::env::current_dir().map_err(domain)?)?
            }
        };
        if let Some(a) = self.archetype {
            cfg.archetype = a;
            if let Some(s) = &mut cfg.scenario {
                s.archetype = a;
            }
        }
        if let Some(spec) = &self.backend {
            cfg.critic_tree.revisor = spec.clone();
            for m in &mut cfg.critic_tree.critics.members {
                m.backend = spec.clone();
            }
            for slot in [&mut cfg.translator, &mut cfg.grounding, &mut cfg.repair] {
                if slot.is_some() {
                    *slot = Some(spec.clone());
                }
            }
        }
        if let Some(seed) = self.seed {
            cfg.set_seed(seed);
        }
        if let Some(j) = self.jobs {
            cfg.jobs = j;
        }
        Ok(cfg)
    }

    fn require_seed(&self, command: &str) -> Result<u64> {
        self.seed
            .ok_or_else(|| CliError::Usage(format!("{command} is stochastic and requires --seed")))
    }

    fn out_dir(&self) -> Result<Option<&Path>> {
        match &self.out {
            Some(p) => {
                fs::create_dir_all(p).map_err(|e| domain(format!("{}: {e}", p.display())))?;
                Ok(Some(p.as_path()))
            }
            None => Ok(None),
        }
    }

    fn write(&self, name: &str, content: &str) -> Result<()> {
        if let Some(dir) = self.out_dir()? {
            let path = dir.join(name);
            fs::write(&path, content).map_err(|e| domain(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }

    fn execute(&self) -> Result<()> {
        match &self.command {
            Command::Parse { formula } => {
                let f = ltl::parse(formula).map_err(domain)?;
                let canon = ltl::canonicalize(&f);
                emit(&json!({ "formula": ltl::to_text(&canon), "ast": ltl::to_json(&canon) }));
            }
            Command::Classify { formula } => {
                let f = ltl::parse(formula).map_err(domain)?;
                emit(&serde_json::to_value(ltl::classify(&f)).expect("verdict serializes"));
            }
            Command::Translate { text, initial } => {
                let seed = self.require_seed("translate")?;
                let cfg = self.config()?;
                let exp = Experiment::new(cfg)?;
                let f = exp.formalizer()?;
                let tree = CriticTree::new(
                    f.revisor.clone(),
                    CriticEnsemble::from_backends(f.critics.clone(), seed),
                    f.tree.clone(),
                );
                let (formula, trace) = tree.run(text, initial).map_err(domain)?;
                self.write(
                    "critic_tree.json",
                    &(serde_json::to_string_pretty(&trace).expect("trace serializes") + "\n"),
                )?;
                emit(&json!({
                    "formula": formula,
                    "termination": trace.termination,
                    "revisor_calls": trace.revisor_calls,
                    "critic_calls": trace.critic_calls,
                    "distinct_revisions": trace.distinct_revisions(),
                }));
            }
            Command::Compile {
                formulas,
                input,
                mode,
            } => {
                let mut cfg = self.config()?;
                if let Some(m) = mode {
                    cfg.prompt_mode = *m;
                }
                let mut all = formulas.clone();
                if let Some(p) = input {
                    let text = fs::read_to_string(p).map_err(|e| domain(format!("{}: {e}", p.display())))?;
                    let listed: Vec<String> = serde_json::from_str(&text)
                        .map_err(|e| domain(format!("{}: expected a JSON array of formulas: {e}", p.display())))?;
                    all.extend(listed);
                }
                if all.is_empty() {
                    return Err(CliError::Usage("compile needs --formula or --input".into()));
                }
                let exp = Experiment::new(cfg)?;
                let compiler = exp.compiler();
                let store = RuleStore::new();
                let outcomes: Vec<_> = all
                    .iter()
                    .enumerate()
                    .map(|(i, f)| compiler.compile_text(f, &format!("cli_{i}"), &store))
                    .collect();
                let report = outcome_report(&outcomes);
                self.write("rules.json", &(store.to_json() + "\n"))?;
                self.write("outcomes.csv", &report.to_csv())?;
                let rows: Vec<_> = all
                    .iter()
                    .zip(&outcomes)
                    .map(|(f, o)| json!({ "formula": f, "result": o }))
                    .collect();
                emit(&json!({ "outcomes": rows, "report": report }));
            }
            Command::GenData { episodes, noise } => {
                self.require_seed("gen-data")?;
                let cfg = self.config()?;
                let mut spec = cfg.scenario_spec();
                if let Some(n) = episodes {
                    spec.episodes = *n;
                }
                if let Some(n) = noise {
                    spec.noise = *n;
                }
                let policy = cfg.policy.clone().unwrap_or_else(|| default_policy(cfg.archetype));
                let eps = generate(&spec, &policy).map_err(domain)?;
                let lines = to_jsonl(&eps);
                if self.out.is_some() {
                    self.write("episodes.jsonl", &lines)?;
                    let steps: usize = eps.iter().map(|e| e.steps.len()).sum();
                    emit(&json!({ "archetype": spec.archetype, "episodes": eps.len(), "steps": steps }));
                } else {
                    stdout(&lines);
                }
            }
            Command::Train {
                rules,
                episodes,
                epochs,
            } => {
                self.require_seed("train")?;
                let mut cfg = self.config()?;
                if let Some(e) = epochs {
                    cfg.train.epochs = *e;
                }
                let kb = load_kb(&cfg)?;
                let rules = read_rules(rules).map_err(domain)?;
                let eps = read_episodes(episodes).map_err(domain)?;
                validate_episodes(&eps, &kb).map_err(domain)?;
                let engine = cfg.train.engine();
                let (trained, curve) = train_with(&rules, &eps, &cfg.train, |_, r| {
                    Some(decision_distributions(r, &eps, &engine, cfg.eval.seed, cfg.eval.samples).mean_js())
                })
                .map_err(domain)?;
                self.write(
                    "rules_trained.json",
                    &(serde_json::to_string_pretty(&trained).expect("rules serialize") + "\n"),
                )?;
                self.write("learning_curve.csv", &curve.to_csv())?;
                stdout(&curve.to_csv());
            }
            Command::Eval { rules, episodes } => {
                self.require_seed("eval")?;
                let cfg = self.config()?;
                let kb = load_kb(&cfg)?;
                let rules = read_rules(rules).map_err(domain)?;
                let eps = read_episodes(episodes).map_err(domain)?;
                validate_episodes(&eps, &kb).map_err(domain)?;
                let engine = cfg.train.engine();
                let agreement = evaluate_agreement(&rules, &eps, &engine, cfg.eval.seed, cfg.eval.runs);
                let dist = decision_distributions(&rules, &eps, &engine, cfg.eval.seed, cfg.eval.samples);
                self.write("js_states.csv", &dist.to_csv())?;
                let states: Vec<_> = dist
                    .states
                    .iter()
                    .map(|s| json!({ "state": s.reference.state, "n": s.reference.n, "js": s.js }))
                    .collect();
                emit(&json!({
                    "agreement": agreement,
                    "mean_js": dist.mean_js(),
                    "fewer_states": dist.fewer_states,
                    "states": states,
                }));
            }
            Command::RunAll { mode } => {
                self.require_seed("run-all")?;
                let out = self
                    .out
                    .clone()
                    .ok_or_else(|| CliError::Usage("run-all requires --out".into()))?;
                let mut cfg = self.config()?;
                if let Some(m) = mode {
                    cfg.prompt_mode = *m;
                }
                let (report, _) = Experiment::new(cfg)?.run(&out)?;
                emit(&serde_json::to_value(report).expect("report serializes"));
            }
        }
        Ok(())
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .try_init();
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_logging(cli.verbose);
    match cli.execute() {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}
