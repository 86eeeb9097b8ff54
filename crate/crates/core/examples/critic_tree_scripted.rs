// The critic tree with scripted models: the three reference traces, and a
// comparison of a single self-critique round against a two-critic,
// depth-two tree on a translation with two independent mistakes.

use std::sync::atomic::{AtomicUsize, Ordering};

use cogform::critic::{CriticTree, CriticTreeConfig, Termination};
use cogform::llm::{ChatMessage, CriticEnsemble, LlmError, Role, ScriptedBackend, SharedBackend};
use cogform::ltl::{self, Formula};
use cogform::pipeline::fixture;
use cogform::scenario::{scenario_kb, Archetype};

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSummary {
    pub name: &'static str,
    pub formula: String,
    pub nodes: usize,
    pub revisor_calls: usize,
    pub critic_calls: usize,
    pub termination: Termination,
}

fn last_user(messages: &[ChatMessage]) -> &str {
    messages
        .iter()
        .rev()
        .find(|m| m.role == Role::User)
        .map_or("", |m| m.content.as_str())
}

/// Answers with the n-th reply of `replies`, repeating the last one.
fn sequence(name: &str, replies: &'static [&'static str]) -> SharedBackend {
    let n = AtomicUsize::new(0);
    ScriptedBackend::shared(name, move |_| {
        let i = n.fetch_add(1, Ordering::SeqCst).min(replies.len() - 1);
        replies[i].to_string()
    })
}

/// Turns "wrong operator" feedback into `G (a -> b)`, otherwise echoes a
/// fixed first guess.
fn operator_revisor() -> SharedBackend {
    ScriptedBackend::shared("operator_revisor", |m| {
        if last_user(m).contains("wrong operator") {
            "LTL: G (a -> b)".into()
        } else {
            "LTL: G (a | b)".into()
        }
    })
}

fn summarize(
    name: &'static str,
    tree: CriticTree,
    text: &str,
    initial: &str,
) -> Result<TraceSummary, LlmError> {
    let (formula, trace) = tree.run(text, initial)?;
    Ok(TraceSummary {
        name,
        formula,
        nodes: trace.nodes.len(),
        revisor_calls: trace.revisor_calls,
        critic_calls: trace.critic_calls,
        termination: trace.termination,
    })
}

/// Always-approve, reject-then-approve and always-reject runs.
pub fn reference_traces() -> Result<Vec<TraceSummary>, LlmError> {
    let approve = summarize(
        "always approve, two critics",
        CriticTree::new(
            operator_revisor(),
            CriticEnsemble::homogeneous(sequence("approve", &["APPROVED"]), 0),
            CriticTreeConfig::new(2, 2),
        ),
        "a or b holds at all times",
        "G (a | b)",
    )?;
    let once = summarize(
        "reject root, approve child",
        CriticTree::new(
            operator_revisor(),
            CriticEnsemble::homogeneous(
                sequence("once", &["REVISE: wrong operator", "APPROVED"]),
                0,
            ),
            CriticTreeConfig::new(1, 1),
        ),
        "whenever a holds, b holds",
        "G (a | b)",
    )?;
    let never = summarize(
        "always reject, depth zero",
        CriticTree::new(
            operator_revisor(),
            CriticEnsemble::homogeneous(sequence("never", &["REVISE: wrong operator"]), 0),
            CriticTreeConfig::new(2, 0),
        ),
        "whenever a holds, b holds",
        "G (a | b)",
    )?;
    Ok(vec![approve, once, never])
}

/// Reports the temporal shape before the vocabulary; the fixture's strict
/// critic does the opposite.
fn shape_first_critic(vocabulary: Vec<String>) -> SharedBackend {
    ScriptedBackend::shared("shape_first_critic", move |m| {
        let formula = last_user(m)
            .lines()
            .find_map(|l| l.strip_prefix("Translation:"))
            .unwrap_or("")
            .trim()
            .to_string();
        match ltl::parse(&formula) {
            Ok(Formula::Finally(inner)) if matches!(*inner, Formula::Implies(..)) => {
                "REVISE: a standing rule must hold always; use G instead of F".into()
            }
            _ => fixture::review(&formula, &vocabulary),
        }
    })
}

pub const ADVERSARIAL_TEXT: &str = "Whenever a car cuts in ahead of me, I brake.";
/// Wrong operator and a paraphrased atom.
pub const ADVERSARIAL_INITIAL: &str = "F (car_cutting_in -> brake)";

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub self_refine_formula: String,
    pub self_refine_distinct: usize,
    pub tree_formula: String,
    pub tree_distinct: usize,
}

/// One homogeneous critic at depth zero against two different critics at
/// depth two.
pub fn self_refine_vs_tree(seed: u64) -> Result<Comparison, LlmError> {
    let vocab = scenario_kb(Archetype::HighwayCutIn).vocabulary();
    let self_refine = CriticTree::new(
        fixture::revisor(),
        CriticEnsemble::homogeneous(fixture::strict_critic(vocab.clone()), seed),
        CriticTreeConfig::new(1, 0).with_vocabulary(vocab.clone()),
    );
    let (sr_formula, sr_trace) = self_refine.run(ADVERSARIAL_TEXT, ADVERSARIAL_INITIAL)?;
    let heterogeneous = CriticEnsemble::from_backends(
        vec![
            (fixture::strict_critic(vocab.clone()), 0.5),
            (shape_first_critic(vocab.clone()), 0.5),
        ],
        seed,
    );
    let tree = CriticTree::new(
        fixture::revisor(),
        heterogeneous,
        CriticTreeConfig::new(2, 2).with_vocabulary(vocab),
    );
    let (tree_formula, tree_trace) = tree.run(ADVERSARIAL_TEXT, ADVERSARIAL_INITIAL)?;
    Ok(Comparison {
        self_refine_formula: sr_formula,
        self_refine_distinct: sr_trace.distinct_revisions(),
        tree_formula,
        tree_distinct: tree_trace.distinct_revisions(),
    })
}

pub fn run_example() -> Result<(Vec<TraceSummary>, Comparison), LlmError> {
    let traces = reference_traces()?;
    for t in &traces {
        println!(
            "{:<28} -> {:<12} nodes {} revisor calls {} critic calls {} ({:?})",
            t.name, t.formula, t.nodes, t.revisor_calls, t.critic_calls, t.termination
        );
    }
    let c = self_refine_vs_tree(11)?;
    println!(
        "self-refine: {} ({} distinct revisions); tree: {} ({} distinct revisions)",
        c.self_refine_formula, c.self_refine_distinct, c.tree_formula, c.tree_distinct
    );
    Ok((traces, c))
}

fn main() -> Result<(), LlmError> {
    run_example().map(|_| ())
}
