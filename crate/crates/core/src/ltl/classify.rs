//! Decides whether a formula can become an IF-THEN production rule.
//!
//! Only `G (<conjunction of literals> -> <conjunction of literals>)` is
//! accepted. Anything temporal beyond the outer `G` is an inference error.

use serde::{Deserialize, Serialize};

use super::ast::Formula;

/// A possibly negated atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub atom: String,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: impl Into<String>) -> Self {
        Literal {
            atom: atom.into(),
            positive: true,
        }
    }

    pub fn neg(atom: impl Into<String>) -> Self {
        Literal {
            atom: atom.into(),
            positive: false,
        }
    }

    pub fn to_formula(&self) -> Formula {
        let a = Formula::Atom(self.atom.clone());
        if self.positive {
            a
        } else {
            Formula::not(a)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// Literal lists are sorted by atom and free of duplicates.
    Convertible {
        antecedent: Vec<Literal>,
        consequent: Vec<Literal>,
    },
    InferenceError { reason: String },
}

impl Verdict {
    pub fn is_convertible(&self) -> bool {
        matches!(self, Verdict::Convertible { .. })
    }

    fn error(reason: impl Into<String>) -> Self {
        Verdict::InferenceError {
            reason: reason.into(),
        }
    }
}

fn first_temporal(f: &Formula) -> Option<&'static str> {
    let mut found = None;
    f.walk(&mut |g| {
        if found.is_none() {
            found = match g {
                Formula::Next(_) => Some("Next"),
                Formula::Until(..) => Some("Until"),
                Formula::Finally(_) => Some("Finally"),
                _ => None,
            };
        }
    });
    found
}

fn contains_globally(f: &Formula) -> bool {
    let mut found = false;
    f.walk(&mut |g| found |= matches!(g, Formula::Globally(_)));
    found
}

/// Flattens a conjunction of literals. `true` conjuncts vanish.
fn conjunction_literals(f: &Formula, out: &mut Vec<Literal>) -> Result<(), String> {
    match f {
        Formula::True => Ok(()),
        Formula::Atom(a) => {
            out.push(Literal::pos(a.clone()));
            Ok(())
        }
        Formula::Not(inner) => match &**inner {
            Formula::Atom(a) => {
                out.push(Literal::neg(a.clone()));
                Ok(())
            }
            Formula::Not(inner2) => conjunction_literals(inner2, out),
            _ => Err("non-conjunctive body".into()),
        },
        Formula::And(l, r) => {
            conjunction_literals(l, out)?;
            conjunction_literals(r, out)
        }
        _ => Err("non-conjunctive body".into()),
    }
}

fn normalize(mut lits: Vec<Literal>, side: &str) -> Result<Vec<Literal>, String> {
    lits.sort();
    lits.dedup();
    if lits.is_empty() {
        return Err(format!("empty {side}"));
    }
    for w in lits.windows(2) {
        if w[0].atom == w[1].atom {
            return Err(format!("contradictory {side} on {}", w[0].atom));
        }
    }
    Ok(lits)
}

/// Classifies `f` as convertible to a production rule or as an inference
/// error naming the offending operator or shape.
pub fn classify(f: &Formula) -> Verdict {
    if let Some(op) = first_temporal(f) {
        return Verdict::error(op);
    }
    let Formula::Globally(body) = f else {
        return Verdict::error("missing Globally");
    };
    if contains_globally(body) {
        return Verdict::error("nested Globally");
    }
    let Formula::Implies(lhs, rhs) = &**body else {
        return Verdict::error("non-implication body");
    };
    let mut antecedent = Vec::new();
    let mut consequent = Vec::new();
    if let Err(reason) = conjunction_literals(lhs, &mut antecedent)
        .and_then(|_| conjunction_literals(rhs, &mut consequent))
    {
        return Verdict::error(reason);
    }
    match (
        normalize(antecedent, "antecedent"),
        normalize(consequent, "consequent"),
    ) {
        (Ok(antecedent), Ok(consequent)) => Verdict::Convertible {
            antecedent,
            consequent,
        },
        (Err(e), _) | (_, Err(e)) => Verdict::error(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse;

    fn verdict(s: &str) -> Verdict {
        classify(&parse(s).unwrap())
    }

    fn reason(s: &str) -> String {
        match verdict(s) {
            Verdict::InferenceError { reason } => reason,
            v => panic!("{s} unexpectedly {v:?}"),
        }
    }

    #[test]
    fn plain_rule() {
        assert_eq!(
            verdict("G(a -> b)"),
            Verdict::Convertible {
                antecedent: vec![Literal::pos("a")],
                consequent: vec![Literal::pos("b")],
            }
        );
    }

    #[test]
    fn conjunction_flattening() {
        assert_eq!(
            verdict("G((a & !c) -> (b & d))"),
            Verdict::Convertible {
                antecedent: vec![Literal::pos("a"), Literal::neg("c")],
                consequent: vec![Literal::pos("b"), Literal::pos("d")],
            }
        );
    }

    #[test]
    fn temporal_operators_are_named() {
        assert_eq!(reason("F a"), "Finally");
        assert_eq!(reason("a U b"), "Until");
        assert_eq!(reason("G (a -> X b)"), "Next");
        assert_eq!(reason("G (a -> F b)"), "Finally");
    }

    #[test]
    fn shape_errors() {
        assert_eq!(reason("a -> b"), "missing Globally");
        assert_eq!(reason("G (a | b -> c)"), "non-conjunctive body");
        assert_eq!(reason("G (a -> (b -> c))"), "non-conjunctive body");
        assert_eq!(reason("G (a)"), "non-implication body");
        assert_eq!(reason("G (a -> G b)"), "nested Globally");
        assert_eq!(reason("G (true -> b)"), "empty antecedent");
        assert_eq!(reason("G ((a & !a) -> b)"), "contradictory antecedent on a");
    }

    #[test]
    fn duplicates_collapse() {
        assert_eq!(
            verdict("G ((a & a & !!a) -> b)"),
            Verdict::Convertible {
                antecedent: vec![Literal::pos("a")],
                consequent: vec![Literal::pos("b")],
            }
        );
    }
}
