use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ltl::is_atom_name;

/// A feature value: boolean, enum symbol or bounded integer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Sym(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Sym(s) => f.write_str(s),
        }
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Sym(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Domain {
    Bool,
    Enum { values: Vec<String> },
    Int { min: i64, max: i64 },
}

impl Domain {
    pub fn contains(&self, v: &Value) -> bool {
        match (self, v) {
            (Domain::Bool, Value::Bool(_)) => true,
            (Domain::Enum { values }, Value::Sym(s)) => values.contains(s),
            (Domain::Int { min, max }, Value::Int(i)) => min <= i && i <= max,
            _ => false,
        }
    }

    /// Every value of the domain, in declaration order.
    pub fn values(&self) -> Vec<Value> {
        match self {
            Domain::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Domain::Enum { values } => values.iter().map(|s| Value::Sym(s.clone())).collect(),
            Domain::Int { min, max } => (*min..=*max).map(Value::Int).collect(),
        }
    }

    /// Reads a value token as written in rule text.
    pub fn parse_value(&self, token: &str) -> Option<Value> {
        let v = match self {
            Domain::Bool => match token {
                "true" => Value::Bool(true),
                "false" => Value::Bool(false),
                _ => return None,
            },
            Domain::Int { .. } => Value::Int(token.parse().ok()?),
            Domain::Enum { .. } => Value::Sym(token.to_string()),
        };
        self.contains(&v).then_some(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureDef {
    pub name: String,
    pub domain: Domain,
    /// Internal features are set by rules, never observed.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub internal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
}

impl Comparator {
    pub fn flip(self) -> Self {
        match self {
            Comparator::Eq => Comparator::Ne,
            Comparator::Ne => Comparator::Eq,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Eq => "=",
            Comparator::Ne => "!=",
        }
    }
}

/// What an LTL atom means in terms of features.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grounding {
    pub feature: String,
    pub cmp: Comparator,
    pub value: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    Longitudinal,
    Lateral,
}

impl Slot {
    pub const ALL: [Slot; 2] = [Slot::Longitudinal, Slot::Lateral];

    pub fn as_str(self) -> &'static str {
        match self {
            Slot::Longitudinal => "longitudinal",
            Slot::Lateral => "lateral",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum KbError {
    #[error("knowledge base is inconsistent: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: std::path::PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

/// Feature definitions, action vocabularies and the atom grounding table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeBase {
    pub features: Vec<FeatureDef>,
    pub longitudinal: Vec<String>,
    pub lateral: Vec<String>,
    pub grounding: BTreeMap<String, Grounding>,
}

impl KnowledgeBase {
    pub fn load(path: &Path) -> Result<Self, KbError> {
        let text = std::fs::read_to_string(path).map_err(|source| KbError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let kb: KnowledgeBase = serde_json::from_str(&text).map_err(|source| KbError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        kb.validate()?;
        Ok(kb)
    }

    pub fn validate(&self) -> Result<(), KbError> {
        let bad = |m: String| Err(KbError::Invalid(m));
        let mut names = BTreeSet::new();
        for f in &self.features {
            if !is_atom_name(&f.name) {
                return bad(format!("feature name {:?} is not an identifier", f.name));
            }
            if !names.insert(f.name.as_str()) {
                return bad(format!("feature {} defined twice", f.name));
            }
            match &f.domain {
                Domain::Enum { values } if values.is_empty() => {
                    return bad(format!("feature {} has an empty enum", f.name))
                }
                Domain::Enum { values } if values.iter().any(|v| !is_atom_name(v)) => {
                    return bad(format!("feature {} has a non-identifier symbol", f.name))
                }
                Domain::Int { min, max } if min > max => {
                    return bad(format!("feature {} has min > max", f.name))
                }
                _ => {}
            }
        }
        if self.longitudinal.is_empty() || self.lateral.is_empty() {
            return bad("action vocabularies must be nonempty".into());
        }
        let mut actions = BTreeSet::new();
        for a in self.longitudinal.iter().chain(&self.lateral) {
            if !is_atom_name(a) || a == "pass" {
                return bad(format!("illegal action name {a:?}"));
            }
            if !actions.insert(a.as_str()) {
                return bad(format!("action {a} appears twice or in both slots"));
            }
        }
        for (atom, g) in &self.grounding {
            if !is_atom_name(atom) {
                return bad(format!("grounding key {atom:?} is not an identifier"));
            }
            if actions.contains(atom.as_str()) {
                return bad(format!("atom {atom} is both an action and a grounded predicate"));
            }
            let Some(def) = self.feature(&g.feature) else {
                return bad(format!("atom {atom} grounds to undefined feature {}", g.feature));
            };
            if !def.domain.contains(&g.value) {
                return bad(format!(
                    "atom {atom} grounds to out-of-domain value {} for {}",
                    g.value, g.feature
                ));
            }
        }
        Ok(())
    }

    pub fn feature(&self, name: &str) -> Option<&FeatureDef> {
        self.features.iter().find(|f| f.name == name)
    }

    pub fn action_slot(&self, action: &str) -> Option<Slot> {
        if self.longitudinal.iter().any(|a| a == action) {
            Some(Slot::Longitudinal)
        } else if self.lateral.iter().any(|a| a == action) {
            Some(Slot::Lateral)
        } else {
            None
        }
    }

    pub fn actions(&self, slot: Slot) -> &[String] {
        match slot {
            Slot::Longitudinal => &self.longitudinal,
            Slot::Lateral => &self.lateral,
        }
    }

    /// Atoms a formula may use: grounded predicates then actions.
    pub fn vocabulary(&self) -> Vec<String> {
        self.grounding
            .keys()
            .cloned()
            .chain(self.longitudinal.iter().cloned())
            .chain(self.lateral.iter().cloned())
            .collect()
    }

    /// Observable (non-internal) features.
    pub fn observable(&self) -> impl Iterator<Item = &FeatureDef> {
        self.features.iter().filter(|f| !f.internal)
    }

    /// One line per feature and action slot, for prompts.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        for f in &self.features {
            let dom = match &f.domain {
                Domain::Bool => "true|false".to_string(),
                Domain::Enum { values } => values.join("|"),
                Domain::Int { min, max } => format!("{min}..{max}"),
            };
            let tag = if f.internal { " (internal)" } else { "" };
            out.push_str(&format!("feature {}: {dom}{tag}\n", f.name));
        }
        out.push_str(&format!("longitudinal: {}\n", self.longitudinal.join("|")));
        out.push_str(&format!("lateral: {}\n", self.lateral.join("|")));
        for (atom, g) in &self.grounding {
            out.push_str(&format!(
                "atom {atom} means {} {} {}\n",
                g.feature,
                g.cmp.symbol(),
                g.value
            ));
        }
        out
    }
}
