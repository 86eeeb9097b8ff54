mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use cogform::llm::{http_attempts, ChatBackend, ChatMessage, LlmError};
use cogform::pipeline::{load_kb, Backends, Experiment, PipelineConfig, PipelineError, MANIFEST};
use cogform::rules::{OutcomeKind, PromptMode};
use common::*;

fn replay() -> PipelineConfig {
    PipelineConfig::load(&fixture("highway/replay.json")).unwrap()
}

fn read_all(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn replay_runs_offline_and_jobs_do_not_change_results() {
    let before = http_attempts();
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for jobs in [1, 4] {
        let dir = tmp.path().join(format!("jobs{jobs}"));
        let cfg = PipelineConfig { jobs, ..replay() };
        let (_, manifest) = Experiment::new(cfg).unwrap().run(&dir).unwrap();
        outputs.push((manifest, read_all(&dir)));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(http_attempts(), before, "replay must not touch the network");

    let (manifest, files) = &outputs[0];
    let names: BTreeSet<&str> = files.iter().map(|(n, _)| n.as_str()).collect();
    assert!(names.contains(MANIFEST));
    for (name, bytes) in files {
        if name != MANIFEST {
            assert_eq!(manifest.files[name], cogform::pipeline::sha256_hex(bytes), "{name}");
        }
    }
    assert_eq!(manifest.files.len(), files.len() - 1);
    let text = String::from_utf8(files.iter().find(|(n, _)| n == MANIFEST).unwrap().1.clone()).unwrap();
    assert!(!text.contains(tmp.path().to_str().unwrap()), "manifest leaks paths");
}

#[test]
fn replay_reproduces_scripted_run_in_both_modes() {
    let scripted = PipelineConfig::load(&fixture("highway/scripted.json")).unwrap();
    for mode in [PromptMode::Literal, PromptMode::Supply] {
        let a = Experiment::new(PipelineConfig { prompt_mode: mode, ..scripted.clone() })
            .unwrap()
            .execute()
            .unwrap();
        let b = Experiment::new(PipelineConfig { prompt_mode: mode, ..replay() })
            .unwrap()
            .execute()
            .unwrap();
        assert_eq!(a.report, b.report);
        assert_eq!(a.trained, b.trained);
    }
}

#[test]
fn every_outcome_kind_occurs_in_the_bundled_corpus() {
    let out = Experiment::new(replay()).unwrap().execute().unwrap();
    let r = &out.report.outcomes;
    for kind in OutcomeKind::ALL {
        assert!(r.count(kind) > 0, "{kind:?} missing");
    }
    assert_eq!(r.total(), out.report.segments);
    assert_eq!(out.report.rules, r.viable);
    assert!(out.report.translation.acc_refined >= out.report.translation.acc_initial);
}

struct Down;

impl ChatBackend for Down {
    fn respond(&self, _: &[ChatMessage]) -> Result<String, LlmError> {
        Err(LlmError::Transport("connection refused".into()))
    }

    fn label(&self) -> String {
        "down".into()
    }
}

#[test]
fn model_outages_become_format_mismatches() {
    let cfg = replay();
    let kb = load_kb(&cfg).unwrap();
    let down: Arc<dyn ChatBackend> = Arc::new(Down);
    let backends = Backends {
        revisor: down.clone(),
        critics: vec![(down, 1.0)],
        translator: None,
        grounding: None,
        repair: None,
    };
    let exp = Experiment::with_backends(cfg, kb, backends);
    let f = exp.formalizer().unwrap().run(&exp.corpus().unwrap());
    assert_eq!(f.report().format_mismatch, f.records.len());
    assert!(f.store.is_empty());
}

#[test]
fn config_errors_are_reported() {
    let mut cfg = replay();
    cfg.corpus = Some("no/such/corpus.json".into());
    assert!(matches!(Experiment::new(cfg), Err(PipelineError::Config(_))));

    let mut cfg = replay();
    cfg.jobs = 0;
    assert!(matches!(Experiment::new(cfg), Err(PipelineError::Config(_))));

    let mut cfg = replay();
    cfg.train.alpha = -1.0;
    assert!(Experiment::new(cfg).is_err());

    let value = serde_json::json!({"archetype": "highway_cut_in"});
    assert!(PipelineConfig::from_value(value, std::path::Path::new(".")).is_err());
}

#[test]
fn manifest_hash_ignores_jobs_but_not_seeds() {
    let a = replay();
    let b = PipelineConfig { jobs: 8, ..replay() };
    assert_eq!(a.canonical_json(), b.canonical_json());
    let mut c = replay();
    c.set_seed(8);
    assert_ne!(a.canonical_json(), c.canonical_json());
}
