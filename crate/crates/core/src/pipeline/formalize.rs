use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::critic::{extract_formula, fill, CriticTree, CriticTreeConfig, Termination, TreeTrace};
use crate::llm::{complete, ChatMessage, CriticEnsemble, LlmError, SharedBackend};
use crate::ltl;
use crate::rules::{
    outcome_report, CompileOutcome, Compiler, OutcomeReport, ProductionRule, RuleStore,
};
use crate::scenario::ExperienceText;

pub const TRANSLATE_SYSTEM: &str = "You translate driving instructions into Linear Temporal Logic. \
Use only the operators G, F, X, U, !, &, |, -> and atoms from this vocabulary: {vocabulary}. \
Answer with a single line of the form `LTL: <formula>`.";

/// Applies `f` to every item on up to `jobs` threads; results keep the
/// input order.
pub fn par_map<T, R, F>(items: &[T], jobs: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync,
{
    let jobs = jobs.max(1).min(items.len().max(1));
    if jobs == 1 {
        return items.iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(i, &items[i]);
                slots.lock().expect("result lock poisoned")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("result lock poisoned")
        .into_iter()
        .map(|r| r.expect("every item processed"))
        .collect()
}

/// Everything needed to turn experience texts into stored rules.
pub struct Formalizer {
    pub compiler: Compiler,
    pub tree: CriticTreeConfig,
    pub revisor: SharedBackend,
    pub critics: Vec<(SharedBackend, f64)>,
    /// Segment `i` samples its critics from a stream seeded with
    /// `critic_seed + i`, so results do not depend on scheduling.
    pub critic_seed: u64,
    pub translator: Option<SharedBackend>,
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub id: String,
    pub text: String,
    pub initial: Option<String>,
    pub refined: Option<String>,
    pub reference: Option<String>,
    pub termination: Option<Termination>,
    pub revisor_calls: usize,
    pub critic_calls: usize,
    #[serde(flatten)]
    pub outcome: CompileOutcome,
}

pub struct Formalization {
    pub records: Vec<SegmentRecord>,
    /// Critic-tree traces by segment; absent when the tree did not run.
    pub trees: Vec<Option<TreeTrace>>,
    pub store: RuleStore,
}

impl Formalization {
    pub fn outcomes(&self) -> Vec<CompileOutcome> {
        self.records.iter().map(|r| r.outcome.clone()).collect()
    }

    pub fn report(&self) -> OutcomeReport {
        outcome_report(&self.outcomes())
    }
}

struct Prepared {
    initial: Option<String>,
    trace: Option<TreeTrace>,
    rule: Result<ProductionRule, CompileOutcome>,
}

fn mismatch(detail: String) -> CompileOutcome {
    CompileOutcome::FormatMismatch { detail }
}

impl Formalizer {
    fn vocabulary(&self) -> String {
        self.compiler.kb.vocabulary().join(", ")
    }

    /// Asks the translator for a first formula.
    pub fn translate(&self, text: &str) -> Result<String, LlmError> {
        let backend = self
            .translator
            .as_ref()
            .ok_or_else(|| LlmError::Config("segment has no initial translation and no translator is configured".into()))?;
        let messages = [
            ChatMessage::system(fill(TRANSLATE_SYSTEM, &[("vocabulary", &self.vocabulary())])),
            ChatMessage::user(text),
        ];
        Ok(extract_formula(&complete(backend.as_ref(), &messages)?.content))
    }

    fn prepare(&self, index: usize, segment: &ExperienceText) -> Prepared {
        let initial = match &segment.initial {
            Some(i) => i.clone(),
            None => match self.translate(&segment.text) {
                Ok(i) => i,
                Err(e) => {
                    return Prepared {
                        initial: None,
                        trace: None,
                        rule: Err(mismatch(format!("initial translation failed: {e}"))),
                    }
                }
            },
        };
        let ensemble =
            CriticEnsemble::from_backends(self.critics.clone(), self.critic_seed.wrapping_add(index as u64));
        let tree = CriticTree::new(self.revisor.clone(), ensemble, self.tree.clone());
        let (refined, trace) = match tree.run(&segment.text, &initial) {
            Ok(r) => r,
            Err(e) => {
                return Prepared {
                    initial: Some(initial),
                    trace: None,
                    rule: Err(mismatch(format!("critic tree failed: {e}"))),
                }
            }
        };
        let rule = match ltl::parse(&refined) {
            Ok(f) => self.compiler.prepare(&f, &segment.id),
            Err(e) => Err(CompileOutcome::InferenceError {
                detail: format!("unparseable formula: {e}"),
            }),
        };
        Prepared {
            initial: Some(initial),
            trace: Some(trace),
            rule,
        }
    }

    /// Refines and compiles every segment. Segments are processed
    /// concurrently; store admission runs afterwards in corpus order.
    pub fn run(&self, segments: &[ExperienceText]) -> Formalization {
        let prepared = par_map(segments, self.jobs, |i, s| self.prepare(i, s));
        let store = RuleStore::new();
        let mut records = Vec::with_capacity(segments.len());
        let mut trees = Vec::with_capacity(segments.len());
        for (segment, p) in segments.iter().zip(prepared) {
            let outcome = match p.rule {
                Ok(rule) => self.compiler.admit(rule, &store),
                Err(o) => o,
            };
            log::info!("{}: {}", segment.id, outcome.kind().as_str());
            records.push(SegmentRecord {
                id: segment.id.clone(),
                text: segment.text.clone(),
                initial: p.initial,
                refined: p.trace.as_ref().map(|t| t.final_formula.clone()),
                reference: segment.reference.clone(),
                termination: p.trace.as_ref().map(|t| t.termination),
                revisor_calls: p.trace.as_ref().map_or(0, |t| t.revisor_calls),
                critic_calls: p.trace.as_ref().map_or(0, |t| t.critic_calls),
                outcome,
            });
            trees.push(p.trace);
        }
        Formalization {
            records,
            trees,
            store,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::fixture;
    use crate::rules::{HashedTrigramEmbedder, OutcomeKind, PromptMode};
    use crate::scenario::{experience_texts, scenario_kb, Archetype};
    use std::sync::Arc;

    fn formalizer(jobs: usize, mode: PromptMode) -> Formalizer {
        let kb = scenario_kb(Archetype::HighwayCutIn);
        Formalizer {
            tree: CriticTreeConfig::new(2, 2).with_vocabulary(kb.vocabulary()),
            critics: vec![
                (fixture::strict_critic(kb.vocabulary()), 0.5),
                (fixture::lenient_critic(), 0.5),
            ],
            compiler: Compiler::new(kb, Arc::new(HashedTrigramEmbedder::default()))
                .with_drafter(fixture::drafter(), mode),
            revisor: fixture::revisor(),
            critic_seed: 3,
            translator: None,
            jobs,
        }
    }

    #[test]
    fn par_map_keeps_order() {
        let items: Vec<usize> = (0..50).collect();
        assert_eq!(par_map(&items, 4, |i, x| i * 100 + x), par_map(&items, 1, |i, x| i * 100 + x));
    }

    #[test]
    fn outcomes_are_conserved_and_jobs_invariant() {
        let texts = experience_texts(Archetype::HighwayCutIn);
        let one = formalizer(1, PromptMode::Literal).run(&texts);
        let four = formalizer(4, PromptMode::Literal).run(&texts);
        assert_eq!(one.records, four.records);
        assert_eq!(one.store.to_json(), four.store.to_json());
        assert_eq!(one.report().total(), texts.len());
        let kinds: Vec<OutcomeKind> = one.records.iter().map(|r| r.outcome.kind()).collect();
        for k in OutcomeKind::ALL {
            assert!(kinds.contains(&k), "no {} outcome in the bundled corpus", k.as_str());
        }
    }

    #[test]
    fn missing_initial_without_translator_is_recorded() {
        let texts = vec![ExperienceText {
            id: "x".into(),
            text: "brake when a car cuts in".into(),
            initial: None,
            reference: None,
        }];
        let f = formalizer(1, PromptMode::Literal).run(&texts);
        assert_eq!(f.records[0].outcome.kind(), OutcomeKind::FormatMismatch);
        assert!(f.store.is_empty());
    }
}
