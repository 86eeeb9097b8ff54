// Utility learning on the smallest interesting case: two rules match the
// same states, one agrees with the reference driver and one does not.
// With the default learning constants the agreeing rule takes over.

use cogform::crl::{train_with, Episode, Step, TrainConfig};
use cogform::engine::{softmax, Decision, WorldState};
use cogform::metrics::decision_distributions;
use cogform::rules::{
    Comparator, Condition, Domain, Effect, Effects, FeatureDef, KnowledgeBase, ProductionRule,
    RuleBody,
};

pub const ZONES: [&str; 5] = ["z0", "z1", "z2", "z3", "z4"];

pub fn two_rule_kb() -> KnowledgeBase {
    KnowledgeBase {
        features: vec![
            FeatureDef {
                name: "hazard".into(),
                domain: Domain::Bool,
                internal: false,
            },
            FeatureDef {
                name: "zone".into(),
                domain: Domain::Enum {
                    values: ZONES.iter().map(|z| z.to_string()).collect(),
                },
                internal: false,
            },
        ],
        longitudinal: ["accelerate", "keep", "decelerate", "brake"].map(String::from).to_vec(),
        lateral: ["keep_lane", "change_left", "change_right"].map(String::from).to_vec(),
        grounding: Default::default(),
    }
}

fn rule(long: &str, lat: &str) -> ProductionRule {
    ProductionRule::from_body(
        RuleBody {
            preconditions: vec![Condition::new("hazard", Comparator::Eq, true)],
            effects: Effects {
                longitudinal: Effect::Act(long.into()),
                lateral: Effect::Act(lat.into()),
                sets: vec![],
            },
        },
        0.0,
    )
}

/// `[agreeing, disagreeing]`, both at utility 0.
pub fn two_rules() -> Vec<ProductionRule> {
    vec![rule("brake", "keep_lane"), rule("accelerate", "change_left")]
}

/// `episodes` x `length` steps in which the reference always brakes and
/// keeps its lane; the zone only varies the state key.
pub fn two_rule_episodes(episodes: usize, length: u64) -> Vec<Episode> {
    (0..episodes)
        .map(|i| Episode {
            id: format!("agree_{i:03}"),
            scenario: "two_rule".into(),
            subject: "reference".into(),
            steps: (0..length)
                .map(|t| Step {
                    state: WorldState::new(t)
                        .with("hazard", true)
                        .with("zone", ZONES[(t as usize + i) % ZONES.len()]),
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

#[derive(Debug, Clone)]
pub struct Convergence {
    pub steps: usize,
    /// Selection probability of the agreeing rule after training.
    pub p_agree: f64,
    /// Mean JS divergence before training and after each epoch.
    pub js: Vec<f64>,
}

/// Trains with `cfg` on 20 episodes of 10 steps per epoch and measures the
/// divergence with `samples` engine runs per state.
pub fn converge(cfg: &TrainConfig, samples: usize) -> Convergence {
    let rules = two_rules();
    let episodes = two_rule_episodes(20, 10);
    let engine = cfg.engine();
    let js_of = |r: &[ProductionRule]| {
        decision_distributions(r, &episodes, &engine, cfg.seed, Some(samples)).mean_js()
    };
    let mut js = vec![js_of(&rules)];
    let (trained, _) = train_with(&rules, &episodes, cfg, |_, r| {
        js.push(js_of(r));
        None
    })
    .expect("fixture rules have unique names");
    let p = softmax(&[trained[0].utility, trained[1].utility], cfg.sigma);
    Convergence {
        steps: cfg.epochs * episodes.iter().map(|e| e.steps.len()).sum::<usize>(),
        p_agree: p[0],
        js,
    }
}

pub fn run_example() -> Convergence {
    let cfg = TrainConfig {
        seed: 5,
        ..TrainConfig::default()
    };
    let c = converge(&cfg, 10_000);
    println!("after {} steps the agreeing rule is chosen with p = {:.3}", c.steps, c.p_agree);
    for (epoch, js) in c.js.iter().enumerate() {
        println!("epoch {epoch:>2}: mean JS {js:.4}");
    }
    c
}

fn main() {
    run_example();
}
