//! Compilation of rule-shaped LTL formulas into production rules.
//!
//! A convertible formula `G (A -> B)` is grounded through the knowledge
//! base (atoms become feature tests and actions), checked by the same
//! loader the engine uses, named from its body and admitted to a
//! [`RuleStore`] unless a stored rule duplicates it. Every attempt ends in
//! one [`CompileOutcome`].

mod compile;
mod embed;
mod ground;
mod kb;
mod loader;
mod naming;
mod report;
mod rule;
mod store;

pub use compile::{
    draft_messages, CompileOptions, CompileOutcome, Compiler, OutcomeKind, PromptMode,
    DRAFT_SYSTEM, LITERAL_INSTRUCTION, REPAIR_INSTRUCTION, SUPPLY_INSTRUCTION,
};
pub use embed::{
    cosine, EmbedError, EmbeddingProvider, FallbackEmbedder, HashedTrigramEmbedder, HttpEmbedder,
};
pub use ground::{ground, GroundError};
pub use kb::{
    Comparator, Domain, FeatureDef, Grounding, KbError, KnowledgeBase, Slot, Value,
};
pub use loader::{check_body, load_rule, render_rule_text, LoadError, LoadErrorKind};
pub use naming::name_rule;
pub use report::{outcome_report, outcome_table_csv, OutcomeReport};
pub use rule::{Assignment, Condition, Effect, Effects, ProductionRule, Provenance, RuleBody};
pub use store::{
    dedup_check, embed_or_fallback, read_rules, write_rules, DedupConfig, DedupDecision,
    RuleStore, StoreError,
};

#[cfg(test)]
pub(crate) use kb::tests::toy_kb;
