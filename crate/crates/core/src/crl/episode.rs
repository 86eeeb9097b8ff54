use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::{Decision, WorldState};
use crate::rules::{KnowledgeBase, Slot};

/// One recorded step: the situation and what the reference driver did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub state: WorldState,
    pub reference: Decision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub id: String,
    pub scenario: String,
    pub subject: String,
    pub steps: Vec<Step>,
}

#[derive(Debug, thiserror::Error)]
pub enum EpisodeSchemaError {
    #[error("episode {episode} step {t}: {message}")]
    State {
        episode: String,
        t: u64,
        message: String,
    },
    #[error("episode {0} has no steps")]
    Empty(String),
    #[error("episode {episode}: steps out of order at t = {t}")]
    Order { episode: String, t: u64 },
    #[error("{path} line {line}: {source}")]
    Record {
        path: std::path::PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// The per-line JSONL layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub episode: String,
    pub scenario: String,
    pub subject: String,
    pub t: u64,
    pub state: std::collections::BTreeMap<String, crate::rules::Value>,
    pub reference: Decision,
}

impl Episode {
    /// Checks states and reference actions against `kb`, and that step
    /// indices increase.
    pub fn validate(&self, kb: &KnowledgeBase) -> Result<(), EpisodeSchemaError> {
        if self.steps.is_empty() {
            return Err(EpisodeSchemaError::Empty(self.id.clone()));
        }
        let mut prev: Option<u64> = None;
        for step in &self.steps {
            let t = step.state.t;
            if prev.is_some_and(|p| p >= t) {
                return Err(EpisodeSchemaError::Order {
                    episode: self.id.clone(),
                    t,
                });
            }
            prev = Some(t);
            let fail = |message: String| EpisodeSchemaError::State {
                episode: self.id.clone(),
                t,
                message,
            };
            step.state.validate(kb).map_err(fail)?;
            for slot in Slot::ALL {
                if let Some(a) = step.reference.slot(slot) {
                    if kb.action_slot(a) != Some(slot) {
                        return Err(fail(format!("{a} is not a {} action", slot.as_str())));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn records(&self) -> impl Iterator<Item = StepRecord> + '_ {
        self.steps.iter().map(|s| StepRecord {
            episode: self.id.clone(),
            scenario: self.scenario.clone(),
            subject: self.subject.clone(),
            t: s.state.t,
            state: s.state.features.clone(),
            reference: Decision {
                fired: Vec::new(),
                ..s.reference.clone()
            },
        })
    }
}

pub fn validate_episodes(episodes: &[Episode], kb: &KnowledgeBase) -> Result<(), EpisodeSchemaError> {
    episodes.iter().try_for_each(|e| e.validate(kb))
}

/// Groups records into episodes, in order of first appearance.
pub fn episodes_from_records(records: Vec<StepRecord>) -> Vec<Episode> {
    let mut out: Vec<Episode> = Vec::new();
    for r in records {
        let step = Step {
            state: WorldState {
                t: r.t,
                features: r.state,
            },
            reference: r.reference,
        };
        match out.iter_mut().find(|e| e.id == r.episode) {
            Some(e) => e.steps.push(step),
            None => out.push(Episode {
                id: r.episode,
                scenario: r.scenario,
                subject: r.subject,
                steps: vec![step],
            }),
        }
    }
    out
}

pub fn to_jsonl(episodes: &[Episode]) -> String {
    let mut out = String::new();
    for e in episodes {
        for r in e.records() {
            out.push_str(&serde_json::to_string(&r).expect("records serialize"));
            out.push('\n');
        }
    }
    out
}

pub fn write_episodes(path: &Path, episodes: &[Episode]) -> Result<(), EpisodeSchemaError> {
    let io = |source| EpisodeSchemaError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = std::fs::File::create(path).map_err(io)?;
    f.write_all(to_jsonl(episodes).as_bytes()).map_err(io)
}

pub fn read_episodes(path: &Path) -> Result<Vec<Episode>, EpisodeSchemaError> {
    let io = |source| EpisodeSchemaError::Io {
        path: path.to_path_buf(),
        source,
    };
    let f = std::fs::File::open(path).map_err(io)?;
    let mut records = Vec::new();
    for (i, line) in std::io::BufReader::new(f).lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let r: StepRecord =
            serde_json::from_str(&line).map_err(|source| EpisodeSchemaError::Record {
                path: path.to_path_buf(),
                line: i + 1,
                source,
            })?;
        records.push(r);
    }
    Ok(episodes_from_records(records))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ep() -> Episode {
        Episode {
            id: "e0".into(),
            scenario: "toy".into(),
            subject: "d0".into(),
            steps: vec![
                Step {
                    state: WorldState::new(0).with("a", 1i64),
                    reference: Decision {
                        longitudinal: Some("brake".into()),
                        lateral: None,
                        fired: vec![],
                    },
                },
                Step {
                    state: WorldState::new(1).with("a", 2i64),
                    reference: Decision::default(),
                },
            ],
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let text = to_jsonl(&[ep()]);
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().next().unwrap().starts_with(
            r#"{"episode":"e0","scenario":"toy","subject":"d0","t":0,"state":{"a":1},"reference":{"longitudinal":"brake","lateral":null}}"#
        ));
        let records: Vec<StepRecord> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(episodes_from_records(records), vec![ep()]);
    }

    #[test]
    fn schema_checks() {
        let kb = crate::rules::toy_kb();
        ep().validate(&kb).unwrap();
        let mut bad = ep();
        bad.steps[0].state.set("a", crate::rules::Value::Int(9));
        assert!(matches!(bad.validate(&kb), Err(EpisodeSchemaError::State { .. })));
        let mut bad = ep();
        bad.steps[0].reference.longitudinal = Some("keep_lane".into());
        assert!(bad.validate(&kb).is_err());
        let mut bad = ep();
        bad.steps[1].state.t = 0;
        assert!(matches!(bad.validate(&kb), Err(EpisodeSchemaError::Order { .. })));
    }
}
