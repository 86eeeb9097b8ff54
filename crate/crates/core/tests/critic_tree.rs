use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use cogform::critic::{CriticTree, CriticTreeConfig, Termination, TraceEvent};
use cogform::llm::{ChatMessage, CriticEnsemble, Role, ScriptedBackend, SharedBackend};

fn last_user(msgs: &[ChatMessage]) -> String {
    msgs.iter()
        .rev()
        .find(|m| m.role == Role::User)
        .map(|m| m.content.clone())
        .unwrap_or_default()
}

fn counting(name: &str, f: impl Fn(usize, &[ChatMessage]) -> String + Send + Sync + 'static) -> (SharedBackend, Arc<AtomicUsize>) {
    let calls = Arc::new(AtomicUsize::new(0));
    let c = calls.clone();
    let backend = ScriptedBackend::shared(name, move |m| {
        let n = c.fetch_add(1, Ordering::SeqCst);
        f(n, m)
    });
    (backend, calls)
}

fn revisor() -> (SharedBackend, Arc<AtomicUsize>) {
    counting("revisor", |_, m| {
        if last_user(m).contains("wrong operator") {
            "G (a -> b)".into()
        } else {
            "LTL: G (a | b)".into()
        }
    })
}

#[test]
fn always_approving_critics_return_root_after_delta_calls() {
    for delta in 1..=3 {
        let (rev, rev_calls) = revisor();
        let (critic, critic_calls) = counting("yes", |_, _| "APPROVED".into());
        let tree = CriticTree::new(
            rev,
            CriticEnsemble::homogeneous(critic, 1),
            CriticTreeConfig::new(delta, 2),
        );
        let (out, trace) = tree.run("a or b holds", "G (a | b)").unwrap();
        assert_eq!(out, "G (a | b)");
        assert_eq!(critic_calls.load(Ordering::SeqCst), delta);
        assert_eq!(rev_calls.load(Ordering::SeqCst), 1);
        assert_eq!(trace.nodes.len(), 1);
        assert_eq!(trace.termination, Termination::Approved);
        assert_eq!(trace.critic_calls, delta);
        assert_eq!(trace.revisor_calls, 1);
    }
}

#[test]
fn rejection_then_approval_returns_child() {
    let (rev, rev_calls) = revisor();
    let (critic, critic_calls) = counting("once", |n, _| {
        if n == 0 {
            "REVISE: wrong operator".into()
        } else {
            "APPROVED".into()
        }
    });
    let tree = CriticTree::new(
        rev,
        CriticEnsemble::homogeneous(critic, 1),
        CriticTreeConfig::new(1, 1),
    );
    let (out, trace) = tree.run("whenever a, b", "G (a | b)").unwrap();
    assert_eq!(out, "G (a -> b)");
    assert_eq!(trace.nodes.len(), 2);
    assert_eq!(trace.returned_node, 1);
    assert_eq!(trace.nodes[1].depth, 1);
    assert_eq!(trace.nodes[1].parent, Some(0));
    assert_eq!(trace.nodes[0].children, vec![1]);
    assert_eq!(rev_calls.load(Ordering::SeqCst), 2);
    assert_eq!(critic_calls.load(Ordering::SeqCst), 2);
    assert_eq!(trace.termination, Termination::Approved);
}

#[test]
fn exhausted_budget_falls_back_to_root() {
    let (rev, rev_calls) = revisor();
    let (critic, _) = counting("never", |_, _| "REVISE: wrong operator".into());
    let tree = CriticTree::new(
        rev,
        CriticEnsemble::homogeneous(critic, 1),
        CriticTreeConfig::new(2, 0),
    );
    let (out, trace) = tree.run("whenever a, b", "G (a | b)").unwrap();
    assert_eq!(out, "G (a | b)");
    assert_eq!(trace.termination, Termination::FallbackRoot);
    assert_eq!(trace.nodes.len(), 3);
    assert_eq!(trace.nodes[0].children, vec![1, 2]);
    assert!(trace.nodes[1].verdicts.is_empty() && trace.nodes[2].verdicts.is_empty());
    assert_eq!(rev_calls.load(Ordering::SeqCst), 3);
    assert_eq!(trace.critic_calls, 2);
}

#[test]
fn fallback_best_prefers_partially_approved_node() {
    // root: both critics reject; children: one approves, one rejects.
    let (rev, _) = counting("rev", |n, _| format!("G (a -> b{n})"));
    let (critic, _) = counting("mixed", |n, _| {
        if n < 2 || n % 2 == 1 {
            "REVISE: no".into()
        } else {
            "APPROVED".into()
        }
    });
    let mut cfg = CriticTreeConfig::new(2, 1);
    cfg.fallback_best = true;
    let tree = CriticTree::new(rev, CriticEnsemble::homogeneous(critic, 1), cfg);
    let (out, trace) = tree.run("t", "G (a -> b)").unwrap();
    assert_eq!(trace.termination, Termination::FallbackBest);
    assert_ne!(trace.returned_node, 0);
    assert_eq!(out, trace.nodes[trace.returned_node].formula.text);
}

#[test]
fn unparseable_revision_is_kept_raw_and_still_judged() {
    let (rev, _) = counting("rev", |n, _| if n == 0 { "G (a ->".into() } else { "G (a -> b)".into() });
    let (critic, _) = counting("c", |n, _| if n == 0 { "REVISE: broken syntax".into() } else { "APPROVED".into() });
    let tree = CriticTree::new(rev, CriticEnsemble::homogeneous(critic, 1), CriticTreeConfig::new(1, 2));
    let (out, trace) = tree.run("t", "x").unwrap();
    assert!(trace.nodes[0].formula.is_raw());
    assert!(matches!(trace.events[0], TraceEvent::Revision { raw: true, .. }));
    assert_eq!(trace.nodes[0].verdicts.len(), 1);
    assert_eq!(out, "G (a -> b)");
}

#[test]
fn children_extend_parent_context_and_bound_calls() {
    let (rev, _) = counting("rev", |n, _| format!("G (a -> b{n})"));
    let (c1, _) = counting("c1", |_, _| "REVISE: nope".into());
    let (c2, _) = counting("c2", |n, _| if n % 3 == 0 { "APPROVED".into() } else { "REVISE: hmm".into() });
    for (delta, depth) in [(1, 0), (2, 2), (3, 1), (2, 3)] {
        let ensemble = CriticEnsemble::from_backends(vec![(c1.clone(), 0.5), (c2.clone(), 0.5)], 7);
        let tree = CriticTree::new(rev.clone(), ensemble, CriticTreeConfig::new(delta, depth));
        let (_, trace) = tree.run("t", "G (a -> b)").unwrap();
        for node in &trace.nodes {
            if let Some(p) = node.parent {
                let parent = &trace.nodes[p];
                assert!(node.context.starts_with(&parent.context));
                assert_eq!(node.depth, parent.depth + 1);
                assert!(node.depth <= depth + 1);
            }
        }
        // one revisor call per node
        assert_eq!(trace.revisor_calls, trace.nodes.len());
        let mut bound = 1;
        let mut level = 1;
        for _ in 0..=depth {
            level *= delta;
            bound += level;
        }
        assert!(trace.revisor_calls <= bound, "{} > {bound}", trace.revisor_calls);
        if trace.termination == Termination::Approved {
            let n = &trace.nodes[trace.returned_node];
            assert!(n.verdicts.iter().all(|v| v.approved));
            assert!(n.children.is_empty());
        } else {
            assert_eq!(trace.returned_node, 0);
        }
    }
}

#[test]
fn critic_prompt_carries_vocabulary() {
    let seen = Arc::new(std::sync::Mutex::new(String::new()));
    let s = seen.clone();
    let critic = ScriptedBackend::shared("spy", move |m| {
        *s.lock().unwrap() = m[0].content.clone();
        "APPROVED".into()
    });
    let (rev, _) = revisor();
    let cfg = CriticTreeConfig::new(1, 0).with_vocabulary(vec!["cut_in".into(), "brake".into()]);
    let tree = CriticTree::new(rev, CriticEnsemble::homogeneous(critic, 1), cfg);
    tree.run("t", "G (a -> b)").unwrap();
    assert!(seen.lock().unwrap().contains("cut_in, brake"));
}

#[test]
fn trace_serializes_deterministically() {
    let run = || {
        let (rev, _) = revisor();
        let (c, _) = counting("c", |n, _| if n == 0 { "REVISE: wrong operator".into() } else { "APPROVED".into() });
        let tree = CriticTree::new(rev, CriticEnsemble::homogeneous(c, 3), CriticTreeConfig::new(1, 1));
        serde_json::to_string(&tree.run("t", "G (a | b)").unwrap().1).unwrap()
    };
    assert_eq!(run(), run());
}
