use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::kb::{Comparator, Slot, Value};
use crate::engine::WorldState;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Condition {
    pub feature: String,
    pub cmp: Comparator,
    pub value: Value,
}

impl Condition {
    pub fn new(feature: impl Into<String>, cmp: Comparator, value: impl Into<Value>) -> Self {
        Condition {
            feature: feature.into(),
            cmp,
            value: value.into(),
        }
    }

    /// An absent feature fails `=` and satisfies `!=`.
    pub fn holds(&self, state: &WorldState) -> bool {
        let actual = state.get(&self.feature);
        match self.cmp {
            Comparator::Eq => actual == Some(&self.value),
            Comparator::Ne => actual != Some(&self.value),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.feature, self.cmp.symbol(), self.value)
    }
}

/// One decision slot's effect.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Effect {
    Pass,
    Act(String),
}

impl Effect {
    pub fn action(&self) -> Option<&str> {
        match self {
            Effect::Pass => None,
            Effect::Act(a) => Some(a),
        }
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, Effect::Pass)
    }
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.action().unwrap_or("pass"))
    }
}

impl Serialize for Effect {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.action().unwrap_or("pass"))
    }
}

impl<'de> Deserialize<'de> for Effect {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(if s == "pass" { Effect::Pass } else { Effect::Act(s) })
    }
}

/// Assignment to an internal feature.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Assignment {
    pub feature: String,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Effects {
    pub longitudinal: Effect,
    pub lateral: Effect,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sets: Vec<Assignment>,
}

impl Effects {
    pub fn slot(&self, slot: Slot) -> &Effect {
        match slot {
            Slot::Longitudinal => &self.longitudinal,
            Slot::Lateral => &self.lateral,
        }
    }

    pub fn slot_mut(&mut self, slot: Slot) -> &mut Effect {
        match slot {
            Slot::Longitudinal => &mut self.longitudinal,
            Slot::Lateral => &mut self.lateral,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.longitudinal.is_pass() && self.lateral.is_pass() && self.sets.is_empty()
    }
}

impl Default for Effects {
    fn default() -> Self {
        Effects {
            longitudinal: Effect::Pass,
            lateral: Effect::Pass,
            sets: Vec::new(),
        }
    }
}

/// Preconditions plus effects, the part of a rule that identifies it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RuleBody {
    pub preconditions: Vec<Condition>,
    pub effects: Effects,
}

impl RuleBody {
    /// Sorted, deduplicated copy. Two bodies are the same rule iff their
    /// canonical forms are equal.
    pub fn canonical(&self) -> RuleBody {
        let mut b = self.clone();
        b.preconditions.sort();
        b.preconditions.dedup();
        b.effects.sets.sort();
        b.effects.sets.dedup();
        b
    }

    pub fn matches(&self, state: &WorldState) -> bool {
        self.preconditions.iter().all(|c| c.holds(state))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source_id: String,
    pub formula: String,
}

/// A named, utility-weighted IF-THEN rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductionRule {
    pub name: String,
    pub preconditions: Vec<Condition>,
    pub effects: Effects,
    pub utility: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl ProductionRule {
    /// Builds a rule named by [`super::name_rule`].
    pub fn from_body(body: RuleBody, utility: f64) -> Self {
        let body = body.canonical();
        ProductionRule {
            name: super::name_rule(&body),
            preconditions: body.preconditions,
            effects: body.effects,
            utility,
            provenance: None,
        }
    }

    pub fn with_provenance(mut self, source_id: &str, formula: &str) -> Self {
        self.provenance = Some(Provenance {
            source_id: source_id.to_string(),
            formula: formula.to_string(),
        });
        self
    }

    pub fn body(&self) -> RuleBody {
        RuleBody {
            preconditions: self.preconditions.clone(),
            effects: self.effects.clone(),
        }
    }

    pub fn matches(&self, state: &WorldState) -> bool {
        self.preconditions.iter().all(|c| c.holds(state))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absent_features() {
        let s = WorldState::new(0).with("a", true);
        assert!(Condition::new("a", Comparator::Eq, true).holds(&s));
        assert!(!Condition::new("b", Comparator::Eq, true).holds(&s));
        assert!(Condition::new("b", Comparator::Ne, true).holds(&s));
    }

    #[test]
    fn effect_json() {
        let e: Effects =
            serde_json::from_str(r#"{"longitudinal": "brake", "lateral": "pass"}"#).unwrap();
        assert_eq!(e.longitudinal, Effect::Act("brake".into()));
        assert_eq!(e.lateral, Effect::Pass);
        assert_eq!(
            serde_json::to_string(&e).unwrap(),
            r#"{"longitudinal":"brake","lateral":"pass"}"#
        );
    }
}
