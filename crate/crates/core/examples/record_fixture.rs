// Records the replay fixture: runs the scripted highway experiment in both
// prompt modes with every model call captured, then writes the transcripts
// and a replay config next to them.
//
// ```text
// cargo run --example record_fixture -- crates/core/fixtures/highway
// ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use cogform::llm::{BackendSpec, RecordingBackend, SharedBackend};
use cogform::pipeline::{fixture, load_kb, Backends, Experiment, PipelineConfig, PipelineError};
use cogform::rules::PromptMode;

fn scripted_config() -> Result<PipelineConfig, PipelineError> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/highway");
    PipelineConfig::load(&dir.join("scripted.json"))
}

fn record(inner: SharedBackend) -> Arc<RecordingBackend> {
    Arc::new(RecordingBackend::new(inner))
}

/// Writes `transcripts/*.jsonl` and `replay.json` into `dir` and returns the
/// replay config path.
pub fn record_fixture(dir: &Path) -> Result<PathBuf, Box<dyn std::error::Error>> {
    let cfg = scripted_config()?;
    let kb = load_kb(&cfg)?;
    let scripts = fixture::registry(&kb);
    let scripted = Backends::connect(&cfg, &scripts)?;
    let revisor = record(scripted.revisor.clone());
    let critics: Vec<(Arc<RecordingBackend>, f64)> = scripted
        .critics
        .iter()
        .map(|(b, p)| (record(b.clone()), *p))
        .collect();
    let drafter = record(scripted.grounding.clone().expect("fixture config has a grounding model"));

    let recorded = Backends {
        revisor: revisor.clone(),
        critics: critics.iter().map(|(b, p)| (b.clone() as SharedBackend, *p)).collect(),
        translator: None,
        grounding: Some(drafter.clone()),
        repair: None,
    };
    let literal = PipelineConfig {
        prompt_mode: PromptMode::Literal,
        ..cfg.clone()
    };
    Experiment::with_backends(literal, kb.clone(), recorded).execute()?;
    let supply = PipelineConfig {
        prompt_mode: PromptMode::Supply,
        ..cfg.clone()
    };
    let grounding_only = Backends {
        grounding: Some(drafter.clone()),
        ..scripted
    };
    Experiment::with_backends(supply, kb.clone(), grounding_only).execute()?;

    let transcripts = dir.join("transcripts");
    std::fs::create_dir_all(&transcripts)?;
    let mut replay = cfg.clone();
    let save = |recorder: &RecordingBackend, name: &str| -> Result<BackendSpec, PipelineError> {
        recorder.write_jsonl(&transcripts.join(name))?;
        Ok(BackendSpec::replay(format!("transcripts/{name}")))
    };
    replay.critic_tree.revisor = save(&revisor, "revisor.jsonl")?;
    for (i, (recorder, _)) in critics.iter().enumerate() {
        let name = match i {
            0 => "strict_critic.jsonl".to_string(),
            1 => "lenient_critic.jsonl".to_string(),
            _ => format!("critic_{i}.jsonl"),
        };
        replay.critic_tree.critics.members[i].backend = save(recorder, &name)?;
    }
    replay.grounding = Some(save(&drafter, "drafter.jsonl")?);
    let path = dir.join("replay.json");
    std::fs::write(&path, serde_json::to_string_pretty(&replay)? + "\n")?;
    Ok(path)
}

/// Records into a scratch directory and checks that the replay run
/// reproduces the scripted one.
pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let replay_path = record_fixture(dir.path())?;
    let scripted = Experiment::new(scripted_config()?)?.execute()?;
    let replayed = Experiment::new(PipelineConfig::load(&replay_path)?)?.execute()?;
    assert_eq!(scripted.report, replayed.report);
    assert_eq!(scripted.trained, replayed.trained);
    println!(
        "replay reproduces the scripted run: {} rules, final mean JS {:.4}",
        replayed.report.rules, replayed.report.js_after
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::init();
    match std::env::args().nth(1) {
        Some(dir) => {
            let path = record_fixture(Path::new(&dir))?;
            println!("wrote {}", path.display());
            Ok(())
        }
        None => run_example(),
    }
}
