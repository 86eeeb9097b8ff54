use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::archetype::{scenario_kb, state_at, Archetype, EpisodeSetup};
use super::policy::ReferencePolicy;
use crate::crl::{Episode, Step};
use crate::engine::{sample_index, Decision};
use crate::rules::{KnowledgeBase, Slot};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerRange {
    pub min: u64,
    pub max: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub archetype: Archetype,
    #[serde(default = "default_episodes")]
    pub episodes: usize,
    #[serde(default = "default_length")]
    pub length: u64,
    /// Step at which the NPC starts its manoeuvre, drawn uniformly.
    #[serde(default = "default_trigger")]
    pub trigger: TriggerRange,
    /// Chance that a reference action is replaced by another action of the
    /// same slot.
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_episodes() -> usize {
    70
}

fn default_length() -> u64 {
    12
}

fn default_trigger() -> TriggerRange {
    TriggerRange { min: 2, max: 5 }
}

impl ScenarioSpec {
    pub fn new(archetype: Archetype, seed: u64) -> Self {
        ScenarioSpec {
            archetype,
            episodes: default_episodes(),
            length: default_length(),
            trigger: default_trigger(),
            noise: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.length == 0 {
            return Err("episode length must be >= 1".into());
        }
        if !(0.0..1.0).contains(&self.noise) {
            return Err("noise must lie in [0, 1)".into());
        }
        if self.trigger.min > self.trigger.max {
            return Err("trigger min exceeds max".into());
        }
        Ok(())
    }
}

fn perturb<R: Rng + ?Sized>(
    decision: &mut Decision,
    kb: &KnowledgeBase,
    noise: f64,
    rng: &mut R,
) {
    for slot in Slot::ALL {
        if noise == 0.0 || !rng.gen_bool(noise) {
            continue;
        }
        let current = decision.slot(slot).map(str::to_string);
        let alternatives: Vec<&String> = kb
            .actions(slot)
            .iter()
            .filter(|a| Some(a.as_str()) != current.as_deref())
            .collect();
        if let Some(a) = alternatives.choose(rng) {
            let a = Some(a.to_string());
            match slot {
                Slot::Longitudinal => decision.longitudinal = a,
                Slot::Lateral => decision.lateral = a,
            }
        }
    }
}

/// Seeded episodes of `spec.archetype` with reference actions from
/// `policy`. Each episode draws one policy component; its name becomes the
/// subject id.
pub fn generate(spec: &ScenarioSpec, policy: &ReferencePolicy) -> Result<Vec<Episode>, String> {
    spec.validate()?;
    let kb = scenario_kb(spec.archetype);
    policy.validate(&kb)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let weights = policy.weights();
    let mut out = Vec::with_capacity(spec.episodes);
    for i in 0..spec.episodes {
        let component = &policy.components[sample_index(&weights, &mut rng)];
        let setup = EpisodeSetup::draw(&mut rng, spec.trigger.min, spec.trigger.max);
        let steps = (0..spec.length)
            .map(|t| {
                let state = state_at(spec.archetype, &setup, t, spec.length);
                let mut reference = component.table.decide(&state);
                perturb(&mut reference, &kb, spec.noise, &mut rng);
                Step { state, reference }
            })
            .collect();
        out.push(Episode {
            id: format!("{}_{i:03}", spec.archetype),
            scenario: spec.archetype.to_string(),
            subject: component.name.clone(),
            steps,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crl::validate_episodes;
    use crate::scenario::policy::{default_policy, driver_tables};

    #[test]
    fn noiseless_single_table_is_exact() {
        for a in Archetype::ALL {
            let (table, _) = driver_tables(a);
            let policy = ReferencePolicy::single("d", table.clone());
            let eps = generate(&ScenarioSpec::new(a, 4), &policy).unwrap();
            assert_eq!(eps.len(), 70);
            for e in &eps {
                for s in &e.steps {
                    assert_eq!(s.reference, table.decide(&s.state));
                }
            }
            validate_episodes(&eps, &scenario_kb(a)).unwrap();
        }
    }

    #[test]
    fn seeded() {
        let spec = ScenarioSpec {
            noise: 0.2,
            ..ScenarioSpec::new(Archetype::SignalizedIntersection, 9)
        };
        let p = default_policy(spec.archetype);
        assert_eq!(generate(&spec, &p).unwrap(), generate(&spec, &p).unwrap());
        let other = ScenarioSpec { seed: 10, ..spec.clone() };
        assert_ne!(generate(&spec, &p).unwrap(), generate(&other, &p).unwrap());
    }

    #[test]
    fn noise_changes_actions_within_slot() {
        let spec = ScenarioSpec {
            noise: 0.5,
            ..ScenarioSpec::new(Archetype::HighwayCutIn, 2)
        };
        let eps = generate(&spec, &default_policy(spec.archetype)).unwrap();
        validate_episodes(&eps, &scenario_kb(spec.archetype)).unwrap();
        let (c, a) = driver_tables(spec.archetype);
        let flipped = eps
            .iter()
            .flat_map(|e| e.steps.iter())
            .filter(|s| s.reference != c.decide(&s.state) && s.reference != a.decide(&s.state))
            .count();
        assert!(flipped > 0);
    }

    #[test]
    fn rejects_bad_specs() {
        let mut spec = ScenarioSpec::new(Archetype::HighwayCutIn, 0);
        spec.noise = 1.0;
        assert!(spec.validate().is_err());
        spec.noise = 0.0;
        spec.length = 0;
        assert!(spec.validate().is_err());
    }
}
