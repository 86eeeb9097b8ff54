use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::episode::Episode;
use crate::engine::Engine;
use crate::rules::{ProductionRule, Slot};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub longitudinal: f64,
    pub lateral: f64,
    /// Over both slots together.
    pub overall: f64,
    /// Share of cycles with a nonempty conflict set for some slot.
    pub rsr: f64,
}

/// Agreement of frozen-utility decisions with the reference, averaged over
/// `n_runs` passes drawn from one seeded stream. Slots whose reference is
/// absent are not scored.
pub fn evaluate_agreement(
    rules: &[ProductionRule],
    episodes: &[Episode],
    engine: &Engine,
    seed: u64,
    n_runs: usize,
) -> Agreement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = [0usize; 2];
    let mut totals = [0usize; 2];
    let (mut matched, mut cycles) = (0usize, 0usize);
    for _ in 0..n_runs {
        for ep in episodes {
            for step in &ep.steps {
                let (d, trace) = engine.decide(&step.state, rules, &mut rng);
                cycles += 1;
                matched += usize::from(trace.matched());
                for slot in Slot::ALL {
                    if let Some(r) = step.reference.slot(slot) {
                        totals[slot as usize] += 1;
                        hits[slot as usize] += usize::from(d.slot(slot) == Some(r));
                    }
                }
            }
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Agreement {
        longitudinal: ratio(hits[0], totals[0]),
        lateral: ratio(hits[1], totals[1]),
        overall: ratio(hits[0] + hits[1], totals[0] + totals[1]),
        rsr: ratio(matched, cycles),
    }
}
