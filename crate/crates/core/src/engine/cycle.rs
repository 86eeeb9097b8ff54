use rand::Rng;
use serde::{Deserialize, Serialize};

use super::select::select;
use super::state::WorldState;
use crate::rules::{ProductionRule, Slot};

/// A rule firing at engine step `step`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Firing {
    pub rule: String,
    pub step: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub longitudinal: Option<String>,
    pub lateral: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fired: Vec<Firing>,
}

impl Decision {
    pub fn slot(&self, slot: Slot) -> Option<&str> {
        match slot {
            Slot::Longitudinal => self.longitudinal.as_deref(),
            Slot::Lateral => self.lateral.as_deref(),
        }
    }

    fn slot_mut(&mut self, slot: Slot) -> &mut Option<String> {
        match slot {
            Slot::Longitudinal => &mut self.longitudinal,
            Slot::Lateral => &mut self.lateral,
        }
    }

    /// `longitudinal|lateral`, with `-` for no action.
    pub fn pair_key(&self) -> String {
        format!(
            "{}|{}",
            self.longitudinal.as_deref().unwrap_or("-"),
            self.lateral.as_deref().unwrap_or("-")
        )
    }
}

/// The decision as it stood after one resolution step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialDecision {
    pub longitudinal: Option<String>,
    pub lateral: Option<String>,
}

/// One conflict resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub step: u64,
    /// Slots this firing decided; empty for a chain firing that only set
    /// internal features.
    pub slots: Vec<Slot>,
    pub conflict: Vec<String>,
    pub probabilities: Vec<f64>,
    pub chosen: String,
    pub decision: PartialDecision,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReasoningTrace {
    pub entries: Vec<TraceEntry>,
}

impl ReasoningTrace {
    /// Whether any slot had a nonempty conflict set.
    pub fn matched(&self) -> bool {
        !self.entries.is_empty()
    }

    pub fn to_jsonl(&self) -> String {
        self.entries
            .iter()
            .map(|e| serde_json::to_string(e).expect("trace entries serialize") + "\n")
            .collect()
    }
}

/// Indices of the rules whose preconditions all hold, ordered by rule name.
pub fn match_rules(state: &WorldState, rules: &[ProductionRule]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..rules.len()).filter(|&i| rules[i].matches(state)).collect();
    idx.sort_by(|&a, &b| rules[a].name.cmp(&rules[b].name).then(a.cmp(&b)));
    idx
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub enabled: bool,
    /// Most internal-feature firings before slot resolution.
    pub max_len: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            enabled: false,
            max_len: 4,
        }
    }
}

/// Utility-driven production cycle.
///
/// Each cycle resolves the longitudinal slot, then the lateral one, among
/// matched rules offering an action for that slot. A rule that wins one
/// slot and also carries an action for the other undecided slot decides
/// both in the same firing. With chaining enabled, rules that change
/// internal features fire first, one resolution at a time, and the
/// resulting state is what the slot rules see.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Engine {
    pub sigma: f64,
    #[serde(default)]
    pub chain: ChainConfig,
}

impl Default for Engine {
    fn default() -> Self {
        Engine {
            sigma: std::f64::consts::SQRT_2,
            chain: ChainConfig::default(),
        }
    }
}

impl Engine {
    pub fn new(sigma: f64) -> Self {
        assert!(sigma > 0.0, "sigma must be positive");
        Engine {
            sigma,
            chain: ChainConfig::default(),
        }
    }

    pub fn with_chain(mut self, max_len: usize) -> Self {
        self.chain = ChainConfig {
            enabled: true,
            max_len,
        };
        self
    }

    pub fn decide<R: Rng + ?Sized>(
        &self,
        state: &WorldState,
        rules: &[ProductionRule],
        rng: &mut R,
    ) -> (Decision, ReasoningTrace) {
        let mut decision = Decision::default();
        let mut trace = ReasoningTrace::default();
        let mut working = state.clone();
        let step = state.t;

        if self.chain.enabled {
            for _ in 0..self.chain.max_len {
                let conflict: Vec<usize> = match_rules(&working, rules)
                    .into_iter()
                    .filter(|&i| {
                        rules[i]
                            .effects
                            .sets
                            .iter()
                            .any(|a| working.get(&a.feature) != Some(&a.value))
                    })
                    .collect();
                if conflict.is_empty() {
                    break;
                }
                let chosen = self.fire(&conflict, rules, rng, step, &mut decision, &mut trace);
                for a in &rules[chosen].effects.sets {
                    working.set(a.feature.clone(), a.value.clone());
                }
            }
        }

        let matched = match_rules(&working, rules);
        for slot in Slot::ALL {
            if decision.slot(slot).is_some() {
                continue;
            }
            let conflict: Vec<usize> = matched
                .iter()
                .copied()
                .filter(|&i| !rules[i].effects.slot(slot).is_pass())
                .collect();
            if !conflict.is_empty() {
                self.fire(&conflict, rules, rng, step, &mut decision, &mut trace);
            }
        }
        (decision, trace)
    }

    fn fire<R: Rng + ?Sized>(
        &self,
        conflict: &[usize],
        rules: &[ProductionRule],
        rng: &mut R,
        step: u64,
        decision: &mut Decision,
        trace: &mut ReasoningTrace,
    ) -> usize {
        let utilities: Vec<f64> = conflict.iter().map(|&i| rules[i].utility).collect();
        let (k, probabilities) = select(&utilities, self.sigma, rng);
        let rule = &rules[conflict[k]];
        let mut slots = Vec::new();
        for slot in Slot::ALL {
            if let Some(action) = rule.effects.slot(slot).action() {
                let target = decision.slot_mut(slot);
                if target.is_none() {
                    *target = Some(action.to_string());
                    slots.push(slot);
                }
            }
        }
        decision.fired.push(Firing {
            rule: rule.name.clone(),
            step,
        });
        trace.entries.push(TraceEntry {
            step,
            slots,
            conflict: conflict.iter().map(|&i| rules[i].name.clone()).collect(),
            probabilities,
            chosen: rule.name.clone(),
            decision: PartialDecision {
                longitudinal: decision.longitudinal.clone(),
                lateral: decision.lateral.clone(),
            },
        });
        conflict[k]
    }
}
