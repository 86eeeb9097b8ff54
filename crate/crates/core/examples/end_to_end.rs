// The whole experiment from recorded model transcripts: formalize the
// corpus, compile rules, generate episodes, fit utilities and evaluate,
// once per prompt mode. Artifacts go to a scratch directory unless one is
// given.
//
// ```text
// cargo run --example end_to_end -- /tmp/highway_run
// ```

use std::path::{Path, PathBuf};

use cogform::pipeline::{Experiment, ExperimentReport, Manifest, PipelineConfig, PipelineError};
use cogform::rules::PromptMode;

pub fn replay_config() -> Result<PipelineConfig, PipelineError> {
    PipelineConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/highway/replay.json"))
}

pub fn run_mode(mode: PromptMode, out: &Path) -> Result<(ExperimentReport, Manifest), PipelineError> {
    let cfg = PipelineConfig {
        prompt_mode: mode,
        ..replay_config()?
    };
    Experiment::new(cfg)?.run(out)
}

pub fn run_in(root: &Path) -> Result<Vec<(PathBuf, ExperimentReport)>, PipelineError> {
    let mut out = Vec::new();
    for (name, mode) in [("literal", PromptMode::Literal), ("supply", PromptMode::Supply)] {
        let dir = root.join(name);
        let (report, manifest) = run_mode(mode, &dir)?;
        let o = &report.outcomes;
        println!(
            "{name:<8} outcomes {}/{}/{}/{} rules {} ACC {:.2} -> {:.2} agreement {:.3} -> {:.3} JS {:.3} -> {:.3} ({} files)",
            o.viable,
            o.format_mismatch,
            o.duplicated_content,
            o.inference_error,
            report.rules,
            report.translation.acc_initial,
            report.translation.acc_refined,
            report.agreement_before.overall,
            report.agreement_after.overall,
            report.js_before,
            report.js_after,
            manifest.files.len()
        );
        out.push((dir, report));
    }
    Ok(out)
}

pub fn run_example() -> Result<Vec<ExperimentReport>, Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    Ok(run_in(dir.path())?.into_iter().map(|(_, r)| r).collect())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::init();
    match std::env::args().nth(1) {
        Some(root) => run_in(Path::new(&root)).map(|_| ()).map_err(Into::into),
        None => run_example().map(|_| ()),
    }
}
