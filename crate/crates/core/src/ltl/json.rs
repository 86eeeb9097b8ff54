//! `{"op": ..., "args": [...]}` encoding of formulas.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use super::ast::{is_atom_name, Formula};

pub fn to_json(f: &Formula) -> Value {
    match f {
        Formula::True => json!({"op": "true", "args": []}),
        Formula::Atom(a) => json!({"op": "atom", "args": [a]}),
        other => json!({
            "op": other.op_name(),
            "args": other.children().into_iter().map(to_json).collect::<Vec<_>>(),
        }),
    }
}

pub fn from_json(v: &Value) -> Result<Formula, String> {
    let op = v
        .get("op")
        .and_then(Value::as_str)
        .ok_or_else(|| format!("missing \"op\" in {v}"))?;
    let args = v
        .get("args")
        .and_then(Value::as_array)
        .ok_or_else(|| format!("missing \"args\" in {v}"))?;
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(format!("{op} takes {n} args, got {}", args.len()))
        }
    };
    let sub = |i: usize| from_json(&args[i]);
    Ok(match op {
        "true" => {
            arity(0)?;
            Formula::True
        }
        "atom" => {
            arity(1)?;
            let name = args[0]
                .as_str()
                .ok_or_else(|| "atom arg must be a string".to_string())?;
            if !is_atom_name(name) {
                return Err(format!("illegal atom name {name:?}"));
            }
            Formula::Atom(name.to_string())
        }
        "not" | "next" | "finally" | "globally" => {
            arity(1)?;
            let inner = sub(0)?;
            match op {
                "not" => Formula::not(inner),
                "next" => Formula::next(inner),
                "finally" => Formula::finally(inner),
                _ => Formula::globally(inner),
            }
        }
        "and" | "or" | "implies" | "until" => {
            arity(2)?;
            let (l, r) = (sub(0)?, sub(1)?);
            match op {
                "and" => Formula::and(l, r),
                "or" => Formula::or(l, r),
                "implies" => Formula::implies(l, r),
                _ => Formula::until(l, r),
            }
        }
        other => return Err(format!("unknown op {other:?}")),
    })
}

impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        to_json(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        from_json(&v).map_err(D::Error::custom)
    }
}
