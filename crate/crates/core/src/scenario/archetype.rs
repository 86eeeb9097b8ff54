use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::WorldState;
use crate::rules::{Comparator, Domain, FeatureDef, Grounding, KnowledgeBase, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Archetype {
    /// A vehicle on the right signals and cuts in ahead.
    HighwayCutIn,
    /// A pedestrian crosses at a signal-controlled junction.
    SignalizedIntersection,
    /// A vehicle in the adjacent lane merges in front and slows down.
    LaneChangeInterference,
}

impl Archetype {
    pub const ALL: [Archetype; 3] = [
        Archetype::HighwayCutIn,
        Archetype::SignalizedIntersection,
        Archetype::LaneChangeInterference,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Archetype::HighwayCutIn => "highway_cut_in",
            Archetype::SignalizedIntersection => "signalized_intersection",
            Archetype::LaneChangeInterference => "lane_change_interference",
        }
    }
}

impl fmt::Display for Archetype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Archetype {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Archetype::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown archetype {s:?}"))
    }
}

pub const LONGITUDINAL: [&str; 4] = ["accelerate", "keep", "decelerate", "brake"];
pub const LATERAL: [&str; 3] = ["keep_lane", "change_left", "change_right"];

fn boolean(name: &str) -> FeatureDef {
    FeatureDef {
        name: name.into(),
        domain: Domain::Bool,
        internal: false,
    }
}

fn enumeration(name: &str, values: &[&str]) -> FeatureDef {
    FeatureDef {
        name: name.into(),
        domain: Domain::Enum {
            values: values.iter().map(|s| s.to_string()).collect(),
        },
        internal: false,
    }
}

fn ground(feature: &str, value: impl Into<Value>) -> Grounding {
    Grounding {
        feature: feature.into(),
        cmp: Comparator::Eq,
        value: value.into(),
    }
}

/// Feature vocabulary, shared action vocabulary and default grounding
/// table of an archetype.
pub fn scenario_kb(archetype: Archetype) -> KnowledgeBase {
    let (features, grounding): (Vec<FeatureDef>, Vec<(&str, Grounding)>) = match archetype {
        Archetype::HighwayCutIn => (
            vec![
                boolean("front_gap_closing"),
                boolean("right_vehicle_signaling"),
                boolean("left_lane_free"),
                enumeration("ego_speed", &["low", "medium", "high"]),
            ],
            vec![
                ("cut_in_ahead", ground("front_gap_closing", true)),
                ("right_signal", ground("right_vehicle_signaling", true)),
                ("left_lane_free", ground("left_lane_free", true)),
                ("high_speed", ground("ego_speed", "high")),
                ("medium_speed", ground("ego_speed", "medium")),
                ("low_speed", ground("ego_speed", "low")),
            ],
        ),
        Archetype::SignalizedIntersection => (
            vec![
                enumeration("signal_state", &["red", "yellow", "green"]),
                boolean("pedestrian_present"),
                boolean("at_stop_line"),
            ],
            vec![
                ("red_light", ground("signal_state", "red")),
                ("yellow_light", ground("signal_state", "yellow")),
                ("green_light", ground("signal_state", "green")),
                ("pedestrian_crossing", ground("pedestrian_present", true)),
                ("near_stop_line", ground("at_stop_line", true)),
            ],
        ),
        Archetype::LaneChangeInterference => (
            vec![
                boolean("slow_vehicle_ahead"),
                boolean("adjacent_vehicle_signaling"),
                boolean("left_lane_free"),
            ],
            vec![
                ("slow_leader", ground("slow_vehicle_ahead", true)),
                ("adjacent_signal", ground("adjacent_vehicle_signaling", true)),
                ("left_lane_free", ground("left_lane_free", true)),
            ],
        ),
    };
    let kb = KnowledgeBase {
        features,
        longitudinal: LONGITUDINAL.iter().map(|s| s.to_string()).collect(),
        lateral: LATERAL.iter().map(|s| s.to_string()).collect(),
        grounding: grounding
            .into_iter()
            .map(|(k, g)| (k.to_string(), g))
            .collect::<BTreeMap<_, _>>(),
    };
    debug_assert!(kb.validate().is_ok());
    kb
}

/// Per-episode draws that stay fixed while the episode unfolds.
#[derive(Debug, Clone, Copy)]
pub(crate) struct EpisodeSetup {
    pub trigger: u64,
    pub left_lane_free: bool,
    /// Signal-cycle offset for the intersection.
    pub phase: u64,
}

impl EpisodeSetup {
    pub fn draw<R: Rng + ?Sized>(rng: &mut R, trigger_min: u64, trigger_max: u64) -> Self {
        EpisodeSetup {
            trigger: rng.gen_range(trigger_min..=trigger_max),
            left_lane_free: rng.gen_bool(0.5),
            phase: rng.gen_range(0..SIGNAL_CYCLE),
        }
    }
}

const SIGNAL_CYCLE: u64 = 9;

fn signal_at(step: u64) -> &'static str {
    match step % SIGNAL_CYCLE {
        0..=3 => "green",
        4 => "yellow",
        _ => "red",
    }
}

/// Symbolic state of an archetype at step `t`.
pub(crate) fn state_at(archetype: Archetype, setup: &EpisodeSetup, t: u64, length: u64) -> WorldState {
    let k = setup.trigger;
    let s = WorldState::new(t);
    match archetype {
        Archetype::HighwayCutIn => {
            let signaling = (k..k + 2).contains(&t);
            let closing = (k + 2..k + 5).contains(&t);
            let speed = if t < k + 2 {
                "high"
            } else if closing {
                "medium"
            } else {
                "low"
            };
            s.with("front_gap_closing", closing)
                .with("right_vehicle_signaling", signaling)
                .with("left_lane_free", setup.left_lane_free)
                .with("ego_speed", speed)
        }
        Archetype::SignalizedIntersection => {
            let near = (length / 3..2 * length / 3 + 1).contains(&t);
            s.with("signal_state", signal_at(setup.phase + t))
                .with("pedestrian_present", (k..k + 3).contains(&t))
                .with("at_stop_line", near)
        }
        Archetype::LaneChangeInterference => s
            .with("adjacent_vehicle_signaling", (k..k + 2).contains(&t))
            .with("slow_vehicle_ahead", t >= k + 2)
            .with("left_lane_free", setup.left_lane_free),
    }
}
