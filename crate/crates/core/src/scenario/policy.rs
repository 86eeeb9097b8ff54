use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::archetype::Archetype;
use crate::engine::{Decision, WorldState};
use crate::rules::{KnowledgeBase, Slot, Value};

/// First matching row wins; `when` lists required feature values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub when: BTreeMap<String, Value>,
    pub longitudinal: String,
    pub lateral: String,
}

/// A total decision function: ordered rows and a fallback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTable {
    pub rows: Vec<TableRow>,
    pub default_longitudinal: String,
    pub default_lateral: String,
}

impl DecisionTable {
    pub fn decide(&self, state: &WorldState) -> Decision {
        let (long, lat) = self
            .rows
            .iter()
            .find(|r| r.when.iter().all(|(k, v)| state.get(k) == Some(v)))
            .map(|r| (&r.longitudinal, &r.lateral))
            .unwrap_or((&self.default_longitudinal, &self.default_lateral));
        Decision {
            longitudinal: Some(long.clone()),
            lateral: Some(lat.clone()),
            fired: Vec::new(),
        }
    }

    pub fn validate(&self, kb: &KnowledgeBase) -> Result<(), String> {
        let action = |slot: Slot, a: &str| {
            if kb.action_slot(a) == Some(slot) {
                Ok(())
            } else {
                Err(format!("{a} is not a {} action", slot.as_str()))
            }
        };
        action(Slot::Longitudinal, &self.default_longitudinal)?;
        action(Slot::Lateral, &self.default_lateral)?;
        for r in &self.rows {
            action(Slot::Longitudinal, &r.longitudinal)?;
            action(Slot::Lateral, &r.lateral)?;
            for (k, v) in &r.when {
                match kb.feature(k) {
                    Some(f) if f.domain.contains(v) => {}
                    _ => return Err(format!("row condition {k} = {v} is not in the knowledge base")),
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyComponent {
    /// Used as the subject id of episodes driven by this table.
    pub name: String,
    pub weight: f64,
    pub table: DecisionTable,
}

/// A mixture of decision tables standing in for a population of drivers.
/// Each episode is driven by one component drawn by weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferencePolicy {
    pub components: Vec<PolicyComponent>,
}

impl ReferencePolicy {
    pub fn single(name: &str, table: DecisionTable) -> Self {
        ReferencePolicy {
            components: vec![PolicyComponent {
                name: name.into(),
                weight: 1.0,
                table,
            }],
        }
    }

    pub fn validate(&self, kb: &KnowledgeBase) -> Result<(), String> {
        if self.components.is_empty() {
            return Err("policy has no components".into());
        }
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        if self.components.iter().any(|c| !(c.weight >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(format!("mixture weights must be >= 0 and sum to 1, got {total}"));
        }
        for c in &self.components {
            c.table.validate(kb).map_err(|e| format!("{}: {e}", c.name))?;
        }
        Ok(())
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }
}

fn row(when: &[(&str, Value)], long: &str, lat: &str) -> TableRow {
    TableRow {
        when: when.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        longitudinal: long.into(),
        lateral: lat.into(),
    }
}

fn table(rows: Vec<TableRow>, long: &str, lat: &str) -> DecisionTable {
    DecisionTable {
        rows,
        default_longitudinal: long.into(),
        default_lateral: lat.into(),
    }
}

fn t() -> Value {
    Value::Bool(true)
}

fn sym(s: &str) -> Value {
    Value::Sym(s.into())
}

/// The cautious and assertive driver tables of an archetype.
pub fn driver_tables(archetype: Archetype) -> (DecisionTable, DecisionTable) {
    match archetype {
        Archetype::HighwayCutIn => (
            table(
                vec![
                    row(&[("front_gap_closing", t())], "brake", "keep_lane"),
                    row(&[("right_vehicle_signaling", t())], "decelerate", "keep_lane"),
                ],
                "keep",
                "keep_lane",
            ),
            table(
                vec![
                    row(
                        &[("front_gap_closing", t()), ("left_lane_free", t())],
                        "keep",
                        "change_left",
                    ),
                    row(&[("front_gap_closing", t())], "decelerate", "keep_lane"),
                ],
                "keep",
                "keep_lane",
            ),
        ),
        Archetype::SignalizedIntersection => (
            table(
                vec![
                    row(&[("pedestrian_present", t())], "brake", "keep_lane"),
                    row(
                        &[("signal_state", sym("red")), ("at_stop_line", t())],
                        "brake",
                        "keep_lane",
                    ),
                    row(&[("signal_state", sym("yellow"))], "decelerate", "keep_lane"),
                ],
                "keep",
                "keep_lane",
            ),
            table(
                vec![
                    row(&[("pedestrian_present", t())], "decelerate", "keep_lane"),
                    row(
                        &[("signal_state", sym("red")), ("at_stop_line", t())],
                        "brake",
                        "keep_lane",
                    ),
                    row(&[("signal_state", sym("green"))], "accelerate", "keep_lane"),
                ],
                "keep",
                "keep_lane",
            ),
        ),
        Archetype::LaneChangeInterference => (
            table(
                vec![
                    row(&[("adjacent_vehicle_signaling", t())], "decelerate", "keep_lane"),
                    row(&[("slow_vehicle_ahead", t())], "decelerate", "keep_lane"),
                ],
                "keep",
                "keep_lane",
            ),
            table(
                vec![
                    row(&[("adjacent_vehicle_signaling", t())], "accelerate", "keep_lane"),
                    row(
                        &[("slow_vehicle_ahead", t()), ("left_lane_free", t())],
                        "keep",
                        "change_left",
                    ),
                ],
                "keep",
                "keep_lane",
            ),
        ),
    }
}

/// Cautious 0.7, assertive 0.3.
pub fn default_policy(archetype: Archetype) -> ReferencePolicy {
    let (cautious, assertive) = driver_tables(archetype);
    ReferencePolicy {
        components: vec![
            PolicyComponent {
                name: "cautious".into(),
                weight: 0.7,
                table: cautious,
            },
            PolicyComponent {
                name: "assertive".into(),
                weight: 0.3,
                table: assertive,
            },
        ],
    }
}
