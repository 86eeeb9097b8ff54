//! Production cycle with softmax conflict resolution over rule utilities.
//!
//! A rule in the conflict set is chosen with probability
//! `exp(u_i / sigma) / sum_j exp(u_j / sigma)`, the sum running over the
//! matched rules only.

mod cycle;
mod select;
mod state;

pub use cycle::{
    match_rules, ChainConfig, Decision, Engine, Firing, PartialDecision, ReasoningTrace,
    TraceEntry,
};
pub use select::{sample_index, select, softmax};
pub use state::WorldState;
