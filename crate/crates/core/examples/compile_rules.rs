// Formalizes the bundled highway corpus with the scripted models in both
// prompt modes and prints the outcome table and the admitted rules.

use std::collections::BTreeMap;
use std::path::Path;

use cogform::pipeline::{Experiment, PipelineConfig, PipelineError};
use cogform::rules::{outcome_table_csv, render_rule_text, OutcomeReport, ProductionRule, PromptMode};

pub struct Compiled {
    pub table: BTreeMap<String, OutcomeReport>,
    pub rules: BTreeMap<String, Vec<ProductionRule>>,
}

pub fn run_example() -> Result<Compiled, PipelineError> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/highway/scripted.json");
    let base = PipelineConfig::load(&path)?;
    let mut table = BTreeMap::new();
    let mut rules = BTreeMap::new();
    for mode in [PromptMode::Literal, PromptMode::Supply] {
        let cfg = PipelineConfig {
            prompt_mode: mode,
            ..base.clone()
        };
        let exp = Experiment::new(cfg)?;
        let f = exp.formalizer()?.run(&exp.corpus()?);
        let mode_name = match mode {
            PromptMode::Literal => "literal",
            PromptMode::Supply => "supply",
        };
        let name = format!("{}_{mode_name}", base.archetype);
        for r in &f.records {
            eprintln!("{name} {}: {}", r.id, r.outcome.kind().as_str());
        }
        table.insert(name.clone(), f.report());
        rules.insert(name, f.store.rules());
    }
    print!("{}", outcome_table_csv(&table));
    for (name, rs) in &rules {
        println!("{name}:");
        for r in rs {
            println!("  {}", render_rule_text(&r.body()));
        }
    }
    Ok(Compiled { table, rules })
}

fn main() -> Result<(), PipelineError> {
    run_example().map(|_| ())
}
