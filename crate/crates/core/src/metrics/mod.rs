//! Scores for translations (exact match after canonicalization, BLEU-4)
//! and for agents (Jensen-Shannon divergence of decision distributions,
//! reasoning success rate).

mod agent;
mod divergence;
mod translation;

pub use agent::{
    decision_distributions, js_divergence, rsr, DecisionDistribution, DistributionReport,
    StateComparison, TOP_STATES,
};
pub use divergence::{js_divergence_maps, js_divergence_vec};
pub use translation::{bleu, corpus_bleu, ltl_bleu, ltl_match, ltl_match_accuracy, BleuStats};
