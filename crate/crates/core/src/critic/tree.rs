use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::prompts::{fill, PromptTemplates};
use super::verdict::{parse_verdict, CriticVerdict};
use crate::llm::{
    complete, connect, BackendSpec, ChatMessage, CriticEnsemble, CriticEnsembleSpec, LlmError,
    ScriptRegistry, SharedBackend,
};
use crate::ltl::{self, Formula};

/// Serializable tree configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticTreeSpec {
    pub num_critics: usize,
    pub max_depth: usize,
    pub revisor: BackendSpec,
    pub critics: CriticEnsembleSpec,
    /// Return the best-judged node instead of the root when nothing is
    /// fully approved.
    #[serde(default)]
    pub fallback_best: bool,
    /// Directory of `.txt` prompt templates; minimal prompts when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub templates_dir: Option<PathBuf>,
}

impl CriticTreeSpec {
    pub fn validate(&self) -> Result<(), LlmError> {
        if self.num_critics == 0 {
            return Err(LlmError::Config("num_critics must be >= 1".into()));
        }
        self.revisor.validate()?;
        self.critics.validate()
    }

    pub fn resolve_paths(&mut self, base: &std::path::Path) {
        self.revisor.resolve_paths(base);
        for m in &mut self.critics.members {
            m.backend.resolve_paths(base);
        }
        if let Some(d) = &self.templates_dir {
            if d.is_relative() {
                self.templates_dir = Some(base.join(d));
            }
        }
    }
}

/// Search parameters independent of the backends.
#[derive(Debug, Clone)]
pub struct CriticTreeConfig {
    /// Critics consulted per node.
    pub num_critics: usize,
    pub max_depth: usize,
    pub fallback_best: bool,
    pub templates: PromptTemplates,
    /// Atom vocabulary interpolated into prompts.
    pub vocabulary: Vec<String>,
}

impl CriticTreeConfig {
    pub fn new(num_critics: usize, max_depth: usize) -> Self {
        assert!(num_critics >= 1, "need at least one critic");
        CriticTreeConfig {
            num_critics,
            max_depth,
            fallback_best: false,
            templates: PromptTemplates::minimal(),
            vocabulary: Vec::new(),
        }
    }

    pub fn with_vocabulary(mut self, vocabulary: Vec<String>) -> Self {
        self.vocabulary = vocabulary;
        self
    }
}

/// A node's formula: the extracted text plus its parse when it has one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeFormula {
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parsed: Option<Formula>,
}

impl NodeFormula {
    pub fn from_reply(reply: &str) -> Self {
        let text = extract_formula(reply);
        let parsed = ltl::parse(&text).ok();
        if parsed.is_none() {
            log::warn!("revisor output is not valid LTL, keeping raw text: {text:?}");
        }
        NodeFormula { text, parsed }
    }

    pub fn is_raw(&self) -> bool {
        self.parsed.is_none()
    }
}

/// Pulls the formula out of a revisor reply: the text after an `LTL:`
/// marker if one exists, otherwise the last non-empty line, without code
/// fences or surrounding backticks.
pub fn extract_formula(reply: &str) -> String {
    let lines: Vec<&str> = reply
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with("```"))
        .collect();
    let marked = lines.iter().rev().find_map(|l| {
        l.get(..4)
            .filter(|h| h.eq_ignore_ascii_case("ltl:"))
            .map(|_| &l[4..])
    });
    let chosen = marked.or(lines.last().copied()).unwrap_or("");
    chosen.trim().trim_matches('`').trim().to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: usize,
    pub formula: NodeFormula,
    pub context: Vec<ChatMessage>,
    pub depth: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Verdicts gathered for this node; empty if never judged.
    pub verdicts: Vec<CriticVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Revision {
        seq: usize,
        node: usize,
        parent: Option<usize>,
        backend: String,
        reply: String,
        raw: bool,
    },
    Verdict {
        seq: usize,
        node: usize,
        critic: usize,
        backend: String,
        approved: bool,
        feedback: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Every critic approved the returned node.
    Approved,
    /// Depth budget exhausted; the root revision is returned.
    FallbackRoot,
    /// Depth budget exhausted; the node with the best approval ratio is
    /// returned.
    FallbackBest,
}

/// Full record of one run. `seq` numbers give the call order; no wall-clock
/// times are recorded so traces are reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeTrace {
    pub text: String,
    pub initial: String,
    pub nodes: Vec<TreeNode>,
    pub events: Vec<TraceEvent>,
    pub returned_node: usize,
    pub termination: Termination,
    pub final_formula: String,
    pub revisor_calls: usize,
    pub critic_calls: usize,
}

impl TreeTrace {
    /// Number of distinct formula texts among the revisions.
    pub fn distinct_revisions(&self) -> usize {
        let mut seen: Vec<&str> = self.nodes.iter().map(|n| n.formula.text.as_str()).collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }
}

/// Revisor plus critic ensemble.
pub struct CriticTree {
    revisor: SharedBackend,
    critics: CriticEnsemble,
    cfg: CriticTreeConfig,
}

struct Run<'a> {
    tree: &'a CriticTree,
    text: &'a str,
    vocabulary: String,
    nodes: Vec<TreeNode>,
    events: Vec<TraceEvent>,
    seq: usize,
    revisor_calls: usize,
    critic_calls: usize,
}

impl<'a> Run<'a> {
    fn next_seq(&mut self) -> usize {
        self.seq += 1;
        self.seq
    }

    fn revise(
        &mut self,
        context: Vec<ChatMessage>,
        parent: Option<usize>,
    ) -> Result<usize, LlmError> {
        let reply = complete(&*self.tree.revisor, &context)?;
        self.revisor_calls += 1;
        let formula = NodeFormula::from_reply(&reply.content);
        let id = self.nodes.len();
        let depth = parent.map_or(0, |p| self.nodes[p].depth + 1);
        let seq = self.next_seq();
        self.events.push(TraceEvent::Revision {
            seq,
            node: id,
            parent,
            backend: self.tree.revisor.label(),
            reply: reply.content.clone(),
            raw: formula.is_raw(),
        });
        let mut context = context;
        context.push(reply);
        self.nodes.push(TreeNode {
            id,
            formula,
            context,
            depth,
            parent,
            children: Vec::new(),
            verdicts: Vec::new(),
        });
        if let Some(p) = parent {
            self.nodes[p].children.push(id);
        }
        Ok(id)
    }

    fn judge(&mut self, id: usize) -> Result<Vec<CriticVerdict>, LlmError> {
        let formula = self.nodes[id].formula.text.clone();
        let verdicts =
            self.tree
                .judge_formula(&formula, self.text, &self.vocabulary, |critic, backend, v| {
                    self.critic_calls += 1;
                    self.seq += 1;
                    self.events.push(TraceEvent::Verdict {
                        seq: self.seq,
                        node: id,
                        critic,
                        backend,
                        approved: v.approved,
                        feedback: v.feedback.clone(),
                    });
                })?;
        self.nodes[id].verdicts = verdicts.clone();
        Ok(verdicts)
    }

    fn best_node(&self) -> usize {
        let score = |n: &TreeNode| {
            if n.verdicts.is_empty() {
                -1.0
            } else {
                n.verdicts.iter().filter(|v| v.approved).count() as f64 / n.verdicts.len() as f64
            }
        };
        let mut best = 0;
        for n in &self.nodes {
            if score(n) > score(&self.nodes[best]) {
                best = n.id;
            }
        }
        best
    }

    fn finish(self, returned_node: usize, termination: Termination, initial: &str) -> TreeTrace {
        TreeTrace {
            text: self.text.to_string(),
            initial: initial.to_string(),
            final_formula: self.nodes[returned_node].formula.text.clone(),
            nodes: self.nodes,
            events: self.events,
            returned_node,
            termination,
            revisor_calls: self.revisor_calls,
            critic_calls: self.critic_calls,
        }
    }
}

impl CriticTree {
    pub fn new(revisor: SharedBackend, critics: CriticEnsemble, cfg: CriticTreeConfig) -> Self {
        CriticTree {
            revisor,
            critics,
            cfg,
        }
    }

    pub fn from_spec(
        spec: &CriticTreeSpec,
        scripts: &ScriptRegistry,
        vocabulary: Vec<String>,
    ) -> Result<Self, LlmError> {
        spec.validate()?;
        let templates = match &spec.templates_dir {
            Some(dir) => PromptTemplates::load_dir(dir).map_err(|source| LlmError::Io {
                path: dir.clone(),
                source,
            })?,
            None => PromptTemplates::minimal(),
        };
        let cfg = CriticTreeConfig {
            num_critics: spec.num_critics,
            max_depth: spec.max_depth,
            fallback_best: spec.fallback_best,
            templates,
            vocabulary,
        };
        Ok(CriticTree::new(
            connect(&spec.revisor, scripts)?,
            CriticEnsemble::connect(&spec.critics, scripts)?,
            cfg,
        ))
    }

    pub fn config(&self) -> &CriticTreeConfig {
        &self.cfg
    }

    fn vocabulary(&self) -> String {
        if self.cfg.vocabulary.is_empty() {
            "(any)".into()
        } else {
            self.cfg.vocabulary.join(", ")
        }
    }

    fn judge_formula(
        &self,
        formula: &str,
        text: &str,
        vocabulary: &str,
        mut on_verdict: impl FnMut(usize, String, &CriticVerdict),
    ) -> Result<Vec<CriticVerdict>, LlmError> {
        let t = &self.cfg.templates;
        let request = [
            ChatMessage::system(fill(&t.critic_system, &[("vocabulary", vocabulary)])),
            ChatMessage::user(fill(
                &t.critic_user,
                &[("text", text), ("formula", formula), ("vocabulary", vocabulary)],
            )),
        ];
        let mut verdicts = Vec::with_capacity(self.cfg.num_critics);
        for _ in 0..self.cfg.num_critics {
            let (critic, backend) = self.critics.sample();
            let reply = complete(&*backend, &request)?;
            let verdict = parse_verdict(&reply.content);
            on_verdict(critic, backend.label(), &verdict);
            verdicts.push(verdict);
        }
        Ok(verdicts)
    }

    /// Gathers one verdict from each of the configured number of sampled
    /// critics for `node`.
    pub fn judge(&self, node: &TreeNode, text: &str) -> Result<Vec<CriticVerdict>, LlmError> {
        self.judge_formula(&node.formula.text, text, &self.vocabulary(), |_, _, _| {})
    }

    /// Refines `initial` as a translation of `text`. Returns the chosen
    /// formula text and the full trace.
    pub fn run(&self, text: &str, initial: &str) -> Result<(String, TreeTrace), LlmError> {
        let vocabulary = self.vocabulary();
        let t = &self.cfg.templates;
        let mut run = Run {
            tree: self,
            text,
            vocabulary: vocabulary.clone(),
            nodes: Vec::new(),
            events: Vec::new(),
            seq: 0,
            revisor_calls: 0,
            critic_calls: 0,
        };
        let root_context = vec![
            ChatMessage::system(fill(&t.revisor_system, &[("vocabulary", &vocabulary)])),
            ChatMessage::user(fill(
                &t.revisor_initial,
                &[("text", text), ("initial", initial), ("vocabulary", &vocabulary)],
            )),
        ];
        let root = run.revise(root_context, None)?;
        let mut level = vec![root];
        for _depth in 0..=self.cfg.max_depth {
            let mut next_level = Vec::new();
            for id in level {
                if !run.nodes[id].children.is_empty() {
                    continue;
                }
                let verdicts = run.judge(id)?;
                if verdicts.iter().all(|v| v.approved) {
                    let trace = run.finish(id, Termination::Approved, initial);
                    return Ok((trace.final_formula.clone(), trace));
                }
                for v in verdicts.iter().filter(|v| !v.approved) {
                    let mut context = run.nodes[id].context.clone();
                    context.push(ChatMessage::user(fill(
                        &t.revisor_feedback,
                        &[("feedback", &v.feedback), ("text", text)],
                    )));
                    next_level.push(run.revise(context, Some(id))?);
                }
            }
            level = next_level;
        }
        let (node, termination) = if self.cfg.fallback_best {
            (run.best_node(), Termination::FallbackBest)
        } else {
            (root, Termination::FallbackRoot)
        };
        let trace = run.finish(node, termination, initial);
        Ok((trace.final_formula.clone(), trace))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extraction_rules() {
        assert_eq!(extract_formula("G (a -> b)"), "G (a -> b)");
        assert_eq!(
            extract_formula("Thinking...\nLTL: G (a -> b)\nDone"),
            "G (a -> b)"
        );
        assert_eq!(extract_formula("```\nG (a)\n```"), "G (a)");
        assert_eq!(extract_formula("here:\n`F a`"), "F a");
        assert_eq!(extract_formula(""), "");
    }

    #[test]
    fn raw_nodes_are_flagged() {
        assert!(NodeFormula::from_reply("G (a ->").is_raw());
        assert!(!NodeFormula::from_reply("G (a -> b)").is_raw());
    }
}
