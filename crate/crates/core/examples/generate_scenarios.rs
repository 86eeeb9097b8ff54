// Seeded scenario episodes for each archetype with the default driver
// mixture, and a check that the same seed gives the same episodes.

use std::collections::BTreeMap;

use cogform::crl::{to_jsonl, validate_episodes, Episode};
use cogform::scenario::{default_policy, generate, scenario_kb, Archetype, ScenarioSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSummary {
    pub archetype: Archetype,
    pub episodes: usize,
    pub steps: usize,
    pub distinct_states: usize,
    /// Episodes per driver component.
    pub subjects: BTreeMap<String, usize>,
}

pub fn summarize(archetype: Archetype, episodes: &[Episode]) -> ScenarioSummary {
    let mut subjects = BTreeMap::new();
    let mut states = std::collections::BTreeSet::new();
    for ep in episodes {
        *subjects.entry(ep.subject.clone()).or_insert(0) += 1;
        states.extend(ep.steps.iter().map(|s| s.state.key()));
    }
    ScenarioSummary {
        archetype,
        episodes: episodes.len(),
        steps: episodes.iter().map(|e| e.steps.len()).sum(),
        distinct_states: states.len(),
        subjects,
    }
}

pub fn run_example() -> Result<Vec<ScenarioSummary>, String> {
    let mut out = Vec::new();
    for archetype in Archetype::ALL {
        let spec = ScenarioSpec {
            noise: 0.05,
            ..ScenarioSpec::new(archetype, 3)
        };
        let policy = default_policy(archetype);
        let episodes = generate(&spec, &policy)?;
        validate_episodes(&episodes, &scenario_kb(archetype)).map_err(|e| e.to_string())?;
        let again = generate(&spec, &policy)?;
        assert_eq!(to_jsonl(&episodes), to_jsonl(&again), "generation is seeded");
        let s = summarize(archetype, &episodes);
        println!(
            "{:<26} {} episodes, {} steps, {} distinct states, drivers {:?}",
            archetype.as_str(),
            s.episodes,
            s.steps,
            s.distinct_states,
            s.subjects
        );
        out.push(s);
    }
    Ok(out)
}

fn main() -> Result<(), String> {
    run_example().map(|_| ())
}
