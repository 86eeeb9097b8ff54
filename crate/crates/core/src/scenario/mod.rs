//! Symbolic driving scenarios and synthetic reference drivers.
//!
//! Each archetype has a fixed feature vocabulary, the shared action
//! vocabulary and scripted NPC dynamics. Reference actions come from
//! decision tables, optionally mixed to model several drivers and
//! perturbed by action noise.

mod archetype;
mod corpus;
mod generate;
mod policy;

pub use archetype::{scenario_kb, Archetype, LATERAL, LONGITUDINAL};
pub use corpus::{experience_texts, read_corpus, CorpusError, ExperienceText};
pub use generate::{generate, ScenarioSpec, TriggerRange};
pub use policy::{
    default_policy, driver_tables, DecisionTable, PolicyComponent, ReferencePolicy, TableRow,
};
