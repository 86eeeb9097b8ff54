use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::rules::{KnowledgeBase, Value};

/// One environment snapshot at engine cycle `t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WorldState {
    pub t: u64,
    pub features: BTreeMap<String, Value>,
}

impl WorldState {
    pub fn new(t: u64) -> Self {
        WorldState {
            t,
            features: BTreeMap::new(),
        }
    }

    pub fn with(mut self, feature: impl Into<String>, value: impl Into<Value>) -> Self {
        self.features.insert(feature.into(), value.into());
        self
    }

    pub fn get(&self, feature: &str) -> Option<&Value> {
        self.features.get(feature)
    }

    pub fn set(&mut self, feature: impl Into<String>, value: Value) {
        self.features.insert(feature.into(), value);
    }

    /// Canonical `feature=value` listing, independent of `t`. Used to group
    /// identical situations.
    pub fn key(&self) -> String {
        self.features
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Checks that every feature is defined in `kb`, observable and in
    /// domain.
    pub fn validate(&self, kb: &KnowledgeBase) -> Result<(), String> {
        for (name, value) in &self.features {
            let Some(def) = kb.feature(name) else {
                return Err(format!("undefined feature {name}"));
            };
            if def.internal {
                return Err(format!("internal feature {name} cannot be observed"));
            }
            if !def.domain.contains(value) {
                return Err(format!("value {value} is outside the domain of {name}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_ignores_time_and_insertion_order() {
        let a = WorldState::new(0).with("b", true).with("a", 2i64);
        let b = WorldState::new(9).with("a", 2i64).with("b", true);
        assert_eq!(a.key(), "a=2,b=true");
        assert_eq!(a.key(), b.key());
    }

    #[test]
    fn json_shape() {
        let s = WorldState::new(3).with("signal", "red");
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"t":3,"features":{"signal":"red"}}"#);
        assert_eq!(serde_json::from_str::<WorldState>(&j).unwrap(), s);
    }
}
