use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::embed::EmbeddingProvider;
use super::ground::{ground, GroundError};
use super::kb::KnowledgeBase;
use super::loader::{load_rule, render_rule_text, LoadError};
use super::rule::{ProductionRule, RuleBody};
use super::store::{DedupConfig, DedupDecision, RuleStore};
use crate::llm::{complete, ChatMessage, SharedBackend};
use crate::ltl::{self, Formula};

/// Whether the grounding model may add preconditions the text leaves out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptMode {
    #[default]
    Literal,
    Supply,
}

pub const DRAFT_SYSTEM: &str = "You turn LTL driving rules into production rules. \
Reply with a single line of the form\n\
IF <feature> = <value> AND ... THEN longitudinal = <action>; lateral = <action>\n\
Use `!=` for negated conditions. Write `pass` for a slot the rule does not decide. \
Use only the features, values and actions listed in the knowledge base.";

pub const LITERAL_INSTRUCTION: &str =
    "Translate the formula literally. Do not add conditions that the formula does not state.";

pub const SUPPLY_INSTRUCTION: &str = "The source text may leave environmental conditions implicit. \
Add any precondition from the knowledge base that a careful driver would also check before acting.";

pub const REPAIR_INSTRUCTION: &str =
    "The rule you wrote failed to load. Fix it and reply with the corrected single line.";

/// Builds the grounding request for one formula.
pub fn draft_messages(
    mode: PromptMode,
    kb: &KnowledgeBase,
    formula: &Formula,
    reading: &RuleBody,
) -> Vec<ChatMessage> {
    let instruction = match mode {
        PromptMode::Literal => LITERAL_INSTRUCTION,
        PromptMode::Supply => SUPPLY_INSTRUCTION,
    };
    vec![
        ChatMessage::system(DRAFT_SYSTEM),
        ChatMessage::user(format!(
            "Knowledge base:\n{}\nFormula: {formula}\nDirect reading: {}\n\n{instruction}",
            kb.describe(),
            render_rule_text(reading)
        )),
    ]
}

/// The result of one compile attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CompileOutcome {
    Viable { rule: ProductionRule },
    FormatMismatch { detail: String },
    DuplicatedContent { existing: String, similarity: f64 },
    InferenceError { detail: String },
}

impl CompileOutcome {
    pub fn kind(&self) -> OutcomeKind {
        match self {
            CompileOutcome::Viable { .. } => OutcomeKind::Viable,
            CompileOutcome::FormatMismatch { .. } => OutcomeKind::FormatMismatch,
            CompileOutcome::DuplicatedContent { .. } => OutcomeKind::DuplicatedContent,
            CompileOutcome::InferenceError { .. } => OutcomeKind::InferenceError,
        }
    }

    pub fn rule(&self) -> Option<&ProductionRule> {
        match self {
            CompileOutcome::Viable { rule } => Some(rule),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Viable,
    FormatMismatch,
    DuplicatedContent,
    InferenceError,
}

impl OutcomeKind {
    pub const ALL: [OutcomeKind; 4] = [
        OutcomeKind::Viable,
        OutcomeKind::FormatMismatch,
        OutcomeKind::DuplicatedContent,
        OutcomeKind::InferenceError,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeKind::Viable => "viable",
            OutcomeKind::FormatMismatch => "format_mismatch",
            OutcomeKind::DuplicatedContent => "duplicated_content",
            OutcomeKind::InferenceError => "inference_error",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompileOptions {
    pub initial_utility: f64,
    /// Loader-error feedback rounds before giving up.
    pub repair_rounds: usize,
    pub dedup: DedupConfig,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            initial_utility: 0.0,
            repair_rounds: 3,
            dedup: DedupConfig::default(),
        }
    }
}

/// Turns formulas into stored production rules.
///
/// Without a drafting backend the grounded body is rendered directly;
/// with one, the model writes the rule text and the loader checks it.
/// Loader errors are sent back to the repair backend (the drafter when
/// none is set) for up to `repair_rounds` attempts.
#[derive(Clone)]
pub struct Compiler {
    pub kb: KnowledgeBase,
    pub provider: Arc<dyn EmbeddingProvider>,
    pub drafter: Option<SharedBackend>,
    pub repair: Option<SharedBackend>,
    pub mode: PromptMode,
    pub opts: CompileOptions,
}

impl Compiler {
    pub fn new(kb: KnowledgeBase, provider: Arc<dyn EmbeddingProvider>) -> Self {
        Compiler {
            kb,
            provider,
            drafter: None,
            repair: None,
            mode: PromptMode::Literal,
            opts: CompileOptions::default(),
        }
    }

    pub fn with_drafter(mut self, backend: SharedBackend, mode: PromptMode) -> Self {
        self.drafter = Some(backend);
        self.mode = mode;
        self
    }

    pub fn with_repair(mut self, backend: SharedBackend) -> Self {
        self.repair = Some(backend);
        self
    }

    pub fn with_options(mut self, opts: CompileOptions) -> Self {
        self.opts = opts;
        self
    }

    /// Compiles formula text; unparseable text is an inference error.
    pub fn compile_text(&self, text: &str, source_id: &str, store: &RuleStore) -> CompileOutcome {
        match ltl::parse(text) {
            Ok(f) => self.compile(&f, source_id, store),
            Err(e) => CompileOutcome::InferenceError {
                detail: format!("unparseable formula: {e}"),
            },
        }
    }

    pub fn compile(&self, formula: &Formula, source_id: &str, store: &RuleStore) -> CompileOutcome {
        match self.prepare(formula, source_id) {
            Ok(rule) => self.admit(rule, store),
            Err(outcome) => outcome,
        }
    }

    /// Everything up to the store: classify, ground, draft and load, name.
    /// Returns the failing outcome on error.
    pub fn prepare(&self, formula: &Formula, source_id: &str) -> Result<ProductionRule, CompileOutcome> {
        let verdict = ltl::classify(formula);
        let reading = match ground(&verdict, &self.kb) {
            Ok(b) => b,
            Err(GroundError::NotConvertible(reason)) => {
                return Err(CompileOutcome::InferenceError {
                    detail: format!("not rule-shaped: {reason}"),
                })
            }
            Err(e) => {
                return Err(CompileOutcome::InferenceError {
                    detail: e.to_string(),
                })
            }
        };
        let body = self
            .load(formula, &reading)
            .map_err(|detail| CompileOutcome::FormatMismatch { detail })?;
        Ok(ProductionRule::from_body(body, self.opts.initial_utility)
            .with_provenance(source_id, &formula.to_string()))
    }

    /// Stores a prepared rule unless it duplicates a stored one.
    pub fn admit(&self, rule: ProductionRule, store: &RuleStore) -> CompileOutcome {
        match store.admit(rule.clone(), self.provider.as_ref(), &self.opts.dedup) {
            DedupDecision::Pass => CompileOutcome::Viable { rule },
            DedupDecision::Duplicate {
                existing,
                similarity,
            } => CompileOutcome::DuplicatedContent {
                existing,
                similarity,
            },
        }
    }

    fn load(&self, formula: &Formula, reading: &RuleBody) -> Result<RuleBody, String> {
        let mut messages = Vec::new();
        let mut text = match &self.drafter {
            Some(backend) => {
                messages = draft_messages(self.mode, &self.kb, formula, reading);
                let reply = complete(backend.as_ref(), &messages)
                    .map_err(|e| format!("grounding model failed: {e}"))?;
                messages.push(reply.clone());
                reply.content
            }
            None => render_rule_text(reading),
        };
        let repairer = self.repair.as_ref().or(self.drafter.as_ref());
        let mut round = 0;
        loop {
            let err: LoadError = match load_rule(&text, &self.kb) {
                Ok(body) => return Ok(body),
                Err(e) => e,
            };
            let Some(backend) = repairer.filter(|_| round < self.opts.repair_rounds) else {
                return Err(if round == 0 {
                    err.to_string()
                } else {
                    format!("{err} (after {round} repair rounds)")
                });
            };
            round += 1;
            if messages.is_empty() {
                messages = draft_messages(self.mode, &self.kb, formula, reading);
                messages.push(ChatMessage::assistant(text.clone()));
            }
            messages.push(ChatMessage::user(format!(
                "{REPAIR_INSTRUCTION}\nError: {err}\nRule: {text}"
            )));
            let reply = complete(backend.as_ref(), &messages)
                .map_err(|e| format!("repair model failed: {e}"))?;
            messages.push(reply.clone());
            text = reply.content;
        }
    }
}
