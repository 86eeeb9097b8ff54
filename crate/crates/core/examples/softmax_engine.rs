// One recognize-act cycle: match, softmax over utilities, fire, and the
// selection frequencies that follow from it.

use std::collections::BTreeMap;

use cogform::engine::{softmax, Engine, WorldState};
use cogform::rules::{Comparator, Condition, Effect, Effects, ProductionRule, RuleBody};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rule(feature: &str, long: &str, lat: Option<&str>, utility: f64) -> ProductionRule {
    ProductionRule::from_body(
        RuleBody {
            preconditions: vec![Condition::new(feature, Comparator::Eq, true)],
            effects: Effects {
                longitudinal: Effect::Act(long.into()),
                lateral: lat.map_or(Effect::Pass, |a| Effect::Act(a.into())),
                sets: vec![],
            },
        },
        utility,
    )
}

/// Empirical longitudinal frequencies over `n` cycles next to the softmax
/// probabilities of the conflict set.
pub fn run_example() -> (Vec<f64>, BTreeMap<String, f64>) {
    let rules = vec![
        rule("front_gap_closing", "brake", Some("keep_lane"), 2.0),
        rule("front_gap_closing", "decelerate", None, 1.0),
        rule("right_vehicle_signaling", "decelerate", None, 0.5),
    ];
    let state = WorldState::new(0)
        .with("front_gap_closing", true)
        .with("right_vehicle_signaling", false);
    let engine = Engine::default();
    let probs = softmax(&[2.0, 1.0], engine.sigma);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (first, trace) = engine.decide(&state, &rules, &mut rng);
    println!("first cycle: {} via {:?}", first.pair_key(), first.fired);
    print!("{}", trace.to_jsonl());

    let n = 20_000;
    let mut counts: BTreeMap<String, f64> = BTreeMap::new();
    for _ in 0..n {
        let (d, _) = engine.decide(&state, &rules, &mut rng);
        *counts.entry(d.longitudinal.unwrap_or_default()).or_default() += 1.0 / n as f64;
    }
    println!("softmax {probs:.3?}, observed {counts:.3?}");
    (probs, counts)
}

fn main() {
    run_example();
}
