use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::episode::{validate_episodes, Episode, EpisodeSchemaError};
use crate::engine::{Engine, Firing, ReasoningTrace};
use crate::rules::{KnowledgeBase, ProductionRule, Slot};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Learning rate.
    pub alpha: f64,
    /// Reward decay per step between firing and reward.
    pub beta: f64,
    /// Softmax temperature of conflict resolution.
    pub sigma: f64,
    pub initial_utility: f64,
    pub reward_pos: f64,
    pub reward_neg: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Internal-feature chaining before slot resolution.
    pub chain: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            alpha: 2e-4,
            beta: 0.01,
            sigma: std::f64::consts::SQRT_2,
            initial_utility: 0.0,
            reward_pos: 10.0,
            reward_neg: 0.0,
            epochs: 10,
            seed: 0,
            chain: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("rule name {0} is not unique")]
    DuplicateRule(String),
    #[error(transparent)]
    Schema(#[from] EpisodeSchemaError),
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::Config(m.into()));
        if !(self.alpha >= 0.0 && self.alpha <= 1.0) {
            return bad("alpha must lie in [0, 1]");
        }
        if !(self.beta >= 0.0) {
            return bad("beta must be >= 0");
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad("sigma must be positive");
        }
        if ![self.initial_utility, self.reward_pos, self.reward_neg]
            .iter()
            .all(|x| x.is_finite())
        {
            return bad("utilities and rewards must be finite");
        }
        Ok(())
    }

    pub fn engine(&self) -> Engine {
        let e = Engine::new(self.sigma);
        match self.chain {
            Some(n) => e.with_chain(n),
            None => e,
        }
    }
}

/// `R - beta * (reward_step - firing step)` for every firing.
pub fn reward_decompose_firings(
    reward: f64,
    firings: &[Firing],
    reward_step: u64,
    beta: f64,
) -> Vec<(String, f64)> {
    firings
        .iter()
        .map(|f| {
            assert!(f.step <= reward_step, "reward precedes a firing");
            (f.rule.clone(), reward - beta * (reward_step - f.step) as f64)
        })
        .collect()
}

/// Splits `reward` over the firings of `trace`, one share per firing.
pub fn reward_decompose(
    reward: f64,
    trace: &ReasoningTrace,
    reward_step: u64,
    beta: f64,
) -> Vec<(String, f64)> {
    let firings: Vec<Firing> = trace
        .entries
        .iter()
        .map(|e| Firing {
            rule: e.chosen.clone(),
            step: e.step,
        })
        .collect();
    reward_decompose_firings(reward, &firings, reward_step, beta)
}

/// `u + alpha * (r - u)`.
pub fn utility_update(u: f64, r: f64, alpha: f64) -> f64 {
    u + alpha * (r - u)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub epoch: usize,
    /// Fraction of rewarded (step, slot) pairs where the engine agreed with
    /// the reference during this epoch.
    pub agreement: f64,
    pub mean_utility: f64,
    pub js: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub points: Vec<CurvePoint>,
}

impl LearningCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,agreement,mean_utility,js\n");
        for p in &self.points {
            let js = p.js.map(|j| format!("{j:.6}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{:.6},{:.6},{js}\n",
                p.epoch, p.agreement, p.mean_utility
            ));
        }
        out
    }
}

fn mean_utility(rules: &[ProductionRule]) -> f64 {
    if rules.is_empty() {
        0.0
    } else {
        rules.iter().map(|r| r.utility).sum::<f64>() / rules.len() as f64
    }
}

/// Utility learner. Rewards are issued per slot at every step whose
/// reference names an action for that slot: `reward_pos` when the engine
/// produced that action, `reward_neg` otherwise. Each reward is spread
/// over the firings since the previous reward for the same slot; firings
/// that decided no slot go to whichever slot is rewarded next.
pub struct Trainer {
    pub cfg: TrainConfig,
    rng: ChaCha8Rng,
    steps: u64,
}

impl Trainer {
    pub fn new(cfg: TrainConfig) -> Result<Self, TrainError> {
        cfg.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(Trainer {
            cfg,
            rng,
            steps: 0,
        })
    }

    /// Episode steps trained on so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// One pass over `episodes` in a freshly shuffled order. Returns the
    /// agreement rate over rewarded slots.
    pub fn epoch(&mut self, rules: &mut [ProductionRule], episodes: &[Episode]) -> f64 {
        let mut order: Vec<usize> = (0..episodes.len()).collect();
        order.shuffle(&mut self.rng);
        let (mut agree, mut total) = (0usize, 0usize);
        for i in order {
            let (a, t) = self.episode(rules, &episodes[i]);
            agree += a;
            total += t;
        }
        if total == 0 {
            0.0
        } else {
            agree as f64 / total as f64
        }
    }

    /// Trains on one episode; returns (agreements, rewarded slots).
    pub fn episode(&mut self, rules: &mut [ProductionRule], episode: &Episode) -> (usize, usize) {
        let index: HashMap<String, usize> = rules
            .iter()
            .enumerate()
            .map(|(i, r)| (r.name.clone(), i))
            .collect();
        let engine = self.cfg.engine();
        let mut windows: [Vec<Firing>; 2] = [Vec::new(), Vec::new()];
        let mut unassigned: Vec<Firing> = Vec::new();
        let (mut agree, mut total) = (0, 0);
        for step in &episode.steps {
            let (decision, trace) = engine.decide(&step.state, rules, &mut self.rng);
            for e in &trace.entries {
                let f = Firing {
                    rule: e.chosen.clone(),
                    step: e.step,
                };
                for s in &e.slots {
                    windows[*s as usize].push(f.clone());
                }
                if e.slots.is_empty() {
                    unassigned.push(f);
                }
            }
            for slot in Slot::ALL {
                let Some(reference) = step.reference.slot(slot) else {
                    continue;
                };
                let hit = decision.slot(slot) == Some(reference);
                total += 1;
                agree += usize::from(hit);
                let reward = if hit {
                    self.cfg.reward_pos
                } else {
                    self.cfg.reward_neg
                };
                let mut window = std::mem::take(&mut windows[slot as usize]);
                window.append(&mut unassigned);
                for (name, r) in
                    reward_decompose_firings(reward, &window, step.state.t, self.cfg.beta)
                {
                    let u = &mut rules[index[&name]].utility;
                    *u = utility_update(*u, r, self.cfg.alpha);
                }
            }
            self.steps += 1;
        }
        (agree, total)
    }
}

fn check_names(rules: &[ProductionRule]) -> Result<(), TrainError> {
    let mut seen = std::collections::HashSet::new();
    for r in rules {
        if !seen.insert(r.name.as_str()) {
            return Err(TrainError::DuplicateRule(r.name.clone()));
        }
    }
    Ok(())
}

/// Trains utilities for `cfg.epochs` epochs. `checkpoint` runs after every
/// epoch and may return a divergence to record in the curve.
pub fn train_with(
    rules: &[ProductionRule],
    episodes: &[Episode],
    cfg: &TrainConfig,
    mut checkpoint: impl FnMut(usize, &[ProductionRule]) -> Option<f64>,
) -> Result<(Vec<ProductionRule>, LearningCurve), TrainError> {
    check_names(rules)?;
    let mut trainer = Trainer::new(cfg.clone())?;
    let mut rules = rules.to_vec();
    let mut curve = LearningCurve::default();
    for epoch in 1..=cfg.epochs {
        let agreement = trainer.epoch(&mut rules, episodes);
        let js = checkpoint(epoch, &rules);
        curve.points.push(CurvePoint {
            epoch,
            agreement,
            mean_utility: mean_utility(&rules),
            js,
        });
    }
    Ok((rules, curve))
}

pub fn train(
    rules: &[ProductionRule],
    episodes: &[Episode],
    cfg: &TrainConfig,
) -> Result<(Vec<ProductionRule>, LearningCurve), TrainError> {
    train_with(rules, episodes, cfg, |_, _| None)
}

/// [`train`] after checking every episode against `kb`.
pub fn train_checked(
    rules: &[ProductionRule],
    episodes: &[Episode],
    kb: &KnowledgeBase,
    cfg: &TrainConfig,
) -> Result<(Vec<ProductionRule>, LearningCurve), TrainError> {
    validate_episodes(episodes, kb)?;
    train(rules, episodes, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crl::episode::Step;
    use crate::engine::{Decision, TraceEntry, PartialDecision, WorldState};
    use crate::rules::{Comparator, Condition, Effect, Effects, RuleBody};

    fn rule(long: &str, lat: &str) -> ProductionRule {
        ProductionRule::from_body(
            RuleBody {
                preconditions: vec![Condition::new("a", Comparator::Eq, true)],
                effects: Effects {
                    longitudinal: Effect::Act(long.into()),
                    lateral: Effect::Act(lat.into()),
                    sets: vec![],
                },
            },
            0.0,
        )
    }

    fn episodes(n: usize, len: u64) -> Vec<Episode> {
        (0..n)
            .map(|i| Episode {
                id: format!("e{i}"),
                scenario: "toy".into(),
                subject: "d".into(),
                steps: (0..len)
                    .map(|t| Step {
                        state: WorldState::new(t).with("a", true),
                        reference: Decision {
                            longitudinal: Some("brake".into()),
                            lateral: Some("keep_lane".into()),
                            fired: vec![],
                        },
                    })
                    .collect(),
            })
            .collect()
    }

    #[test]
    fn eq2_examples() {
        let f = |step| Firing {
            rule: "r".into(),
            step,
        };
        assert_eq!(reward_decompose_firings(10.0, &[f(3)], 3, 0.01)[0].1, 10.0);
        assert!((reward_decompose_firings(10.0, &[f(0)], 5, 0.01)[0].1 - 9.95).abs() < 1e-12);
        let r = reward_decompose_firings(0.0, &[f(0), f(2)], 7, 0.01);
        assert!((r[0].1 + 0.07).abs() < 1e-12);
        assert!(r[0].1 < r[1].1);
    }

    #[test]
    fn decompose_from_trace() {
        let entry = |step| TraceEntry {
            step,
            slots: vec![],
            conflict: vec!["r".into()],
            probabilities: vec![1.0],
            chosen: "r".into(),
            decision: PartialDecision {
                longitudinal: None,
                lateral: None,
            },
        };
        let trace = ReasoningTrace {
            entries: vec![entry(1), entry(1), entry(4)],
        };
        let r = reward_decompose(10.0, &trace, 4, 0.5);
        assert_eq!(r.len(), 3);
        assert_eq!(r[0].1, 8.5);
        assert_eq!(r[2].1, 10.0);
    }

    #[test]
    fn eq3_examples() {
        assert!((utility_update(0.0, 10.0, 2e-4) - 0.002).abs() < 1e-15);
        assert_eq!(utility_update(3.0, 3.0, 0.3), 3.0);
        assert_eq!(utility_update(5.0, 0.0, 0.5), 2.5);
    }

    #[test]
    fn zero_epochs_and_zero_alpha() {
        let rules = vec![rule("brake", "keep_lane"), rule("accelerate", "change_left")];
        let cfg = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        let (out, curve) = train(&rules, &episodes(2, 5), &cfg).unwrap();
        assert_eq!(out, rules);
        assert!(curve.points.is_empty());
        let cfg = TrainConfig {
            alpha: 0.0,
            epochs: 3,
            ..TrainConfig::default()
        };
        let (out, curve) = train(&rules, &episodes(2, 5), &cfg).unwrap();
        assert_eq!(out, rules);
        assert_eq!(curve.points.len(), 3);
    }

    #[test]
    fn agreeing_rule_wins() {
        let rules = vec![rule("brake", "keep_lane"), rule("accelerate", "change_left")];
        let cfg = TrainConfig {
            epochs: 1,
            seed: 11,
            ..TrainConfig::default()
        };
        let (out, _) = train(&rules, &episodes(20, 100), &cfg).unwrap();
        let good = out.iter().find(|r| r.name.contains("brake")).unwrap();
        let bad = out.iter().find(|r| r.name.contains("accelerate")).unwrap();
        assert!(good.utility > bad.utility);
        assert!(bad.utility <= 0.0);
    }

    #[test]
    fn reproducible() {
        let rules = vec![rule("brake", "keep_lane"), rule("accelerate", "change_left")];
        let cfg = TrainConfig {
            epochs: 2,
            seed: 5,
            ..TrainConfig::default()
        };
        let a = train(&rules, &episodes(5, 10), &cfg).unwrap();
        let b = train(&rules, &episodes(5, 10), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_duplicate_names_and_bad_config() {
        let r = rule("brake", "keep_lane");
        assert!(matches!(
            train(&[r.clone(), r], &[], &TrainConfig::default()),
            Err(TrainError::DuplicateRule(_))
        ));
        let cfg = TrainConfig {
            sigma: 0.0,
            ..TrainConfig::default()
        };
        assert!(matches!(train(&[], &[], &cfg), Err(TrainError::Config(_))));
    }
}
