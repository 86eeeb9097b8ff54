use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::divergence::js_divergence_maps;
use crate::crl::Episode;
use crate::engine::{Engine, ReasoningTrace, WorldState};
use crate::rules::ProductionRule;

/// Decision frequencies in one situation, keyed `longitudinal|lateral`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionDistribution {
    pub state: String,
    pub probabilities: BTreeMap<String, f64>,
    pub n: usize,
}

impl DecisionDistribution {
    pub fn from_samples<'a>(state: &str, samples: impl IntoIterator<Item = &'a str>) -> Self {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        let mut n = 0;
        for s in samples {
            *counts.entry(s.to_string()).or_insert(0) += 1;
            n += 1;
        }
        assert!(n > 0, "a distribution needs at least one sample");
        DecisionDistribution {
            state: state.to_string(),
            probabilities: counts
                .into_iter()
                .map(|(k, c)| (k, c as f64 / n as f64))
                .collect(),
            n,
        }
    }
}

pub fn js_divergence(p: &DecisionDistribution, q: &DecisionDistribution) -> f64 {
    js_divergence_maps(&p.probabilities, &q.probabilities)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateComparison {
    pub reference: DecisionDistribution,
    pub model: DecisionDistribution,
    pub js: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub states: Vec<StateComparison>,
    /// Set when fewer than `top_k` distinct states exist.
    pub fewer_states: bool,
}

impl DistributionReport {
    pub fn mean_js(&self) -> f64 {
        if self.states.is_empty() {
            0.0
        } else {
            self.states.iter().map(|s| s.js).sum::<f64>() / self.states.len() as f64
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("state,n,js\n");
        for s in &self.states {
            out.push_str(&format!("\"{}\",{},{:.6}\n", s.reference.state, s.reference.n, s.js));
        }
        out
    }
}

pub const TOP_STATES: usize = 10;

/// Reference and model decision distributions for the `TOP_STATES` most
/// frequent states (ties broken by state key). The engine runs `n` times
/// per state, `n` being the state's sample count unless `samples`
/// overrides it.
pub fn decision_distributions(
    rules: &[ProductionRule],
    episodes: &[Episode],
    engine: &Engine,
    seed: u64,
    samples: Option<usize>,
) -> DistributionReport {
    let mut groups: BTreeMap<String, (WorldState, Vec<String>)> = BTreeMap::new();
    for ep in episodes {
        for step in &ep.steps {
            groups
                .entry(step.state.key())
                .or_insert_with(|| (step.state.clone(), Vec::new()))
                .1
                .push(step.reference.pair_key());
        }
    }
    let mut ranked: Vec<(&String, &(WorldState, Vec<String>))> = groups.iter().collect();
    ranked.sort_by(|a, b| b.1 .1.len().cmp(&a.1 .1.len()).then(a.0.cmp(b.0)));
    let fewer_states = ranked.len() < TOP_STATES;
    ranked.truncate(TOP_STATES);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = ranked
        .into_iter()
        .map(|(key, (state, refs))| {
            let reference = DecisionDistribution::from_samples(key, refs.iter().map(String::as_str));
            let n = samples.unwrap_or(refs.len());
            let runs: Vec<String> = (0..n)
                .map(|_| engine.decide(state, rules, &mut rng).0.pair_key())
                .collect();
            let model = DecisionDistribution::from_samples(key, runs.iter().map(String::as_str));
            let js = js_divergence(&reference, &model);
            StateComparison {
                reference,
                model,
                js,
            }
        })
        .collect();
    DistributionReport {
        states,
        fewer_states,
    }
}

/// Share of cycles that found an applicable rule for some slot.
pub fn rsr(traces: &[ReasoningTrace]) -> f64 {
    if traces.is_empty() {
        return 0.0;
    }
    traces.iter().filter(|t| t.matched()).count() as f64 / traces.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crl::Step;
    use crate::engine::{Decision, TraceEntry, PartialDecision};
    use crate::rules::{Comparator, Condition, Effect, Effects, RuleBody};

    fn step(t: u64, a: bool, long: &str) -> Step {
        Step {
            state: WorldState::new(t).with("a", a),
            reference: Decision {
                longitudinal: Some(long.into()),
                lateral: None,
                fired: vec![],
            },
        }
    }

    fn brake_rule() -> ProductionRule {
        ProductionRule::from_body(
            RuleBody {
                preconditions: vec![Condition::new("a", Comparator::Eq, true)],
                effects: Effects {
                    longitudinal: Effect::Act("brake".into()),
                    ..Effects::default()
                },
            },
            0.0,
        )
    }

    #[test]
    fn single_state_point_mass() {
        let ep = Episode {
            id: "e".into(),
            scenario: "s".into(),
            subject: "d".into(),
            steps: (0..50).map(|t| step(t, true, "brake")).collect(),
        };
        let r = decision_distributions(&[brake_rule()], &[ep], &Engine::default(), 1, None);
        assert!(r.fewer_states);
        assert_eq!(r.states.len(), 1);
        assert_eq!(r.states[0].model.n, 50);
        assert_eq!(r.states[0].model.probabilities["brake|-"], 1.0);
        assert_eq!(r.states[0].js, 0.0);
    }

    #[test]
    fn ranking_by_count_then_key() {
        let mut steps: Vec<Step> = (0..3).map(|t| step(t, true, "brake")).collect();
        steps.extend((3..6).map(|t| step(t, false, "keep")));
        let ep = Episode {
            id: "e".into(),
            scenario: "s".into(),
            subject: "d".into(),
            steps,
        };
        let r = decision_distributions(&[], &[ep], &Engine::default(), 1, Some(4));
        assert_eq!(r.states[0].reference.state, "a=false");
        assert_eq!(r.states[1].reference.state, "a=true");
        assert_eq!(r.states[0].model.n, 4);
        assert_eq!(r.states[0].model.probabilities["-|-"], 1.0);
    }

    #[test]
    fn rsr_counts() {
        let hit = ReasoningTrace {
            entries: vec![TraceEntry {
                step: 0,
                slots: vec![],
                conflict: vec!["r".into()],
                probabilities: vec![1.0],
                chosen: "r".into(),
                decision: PartialDecision {
                    longitudinal: None,
                    lateral: None,
                },
            }],
        };
        let miss = ReasoningTrace::default();
        assert_eq!(rsr(&[hit.clone(), hit.clone(), hit, miss.clone()]), 0.75);
        assert_eq!(rsr(&[miss]), 0.0);
        assert_eq!(rsr(&[]), 0.0);
    }
}
