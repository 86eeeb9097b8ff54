//! Canonical forms used for exact-match scoring.
//!
//! Rule-shaped formulas keep their `G (A -> B)` skeleton with both sides
//! rebuilt as sorted conjunctions. Everything else is reduced to the core
//! operators: `|` and `->` become `!`/`&`, `F φ` becomes `true U φ` and
//! `G φ` becomes `!(true U !φ)`. Conjunctions are flattened, stripped of
//! `true` units and sorted by printed form; double negations cancel.

use super::ast::Formula;
use super::classify::{classify, Literal, Verdict};
use super::print::to_text;

pub fn canonicalize(f: &Formula) -> Formula {
    if let Verdict::Convertible {
        antecedent,
        consequent,
    } = classify(f)
    {
        return Formula::globally(Formula::implies(
            literal_conjunction(&antecedent),
            literal_conjunction(&consequent),
        ));
    }
    canon(f)
}

fn literal_conjunction(lits: &[Literal]) -> Formula {
    build_conjunction(lits.iter().map(Literal::to_formula).collect())
}

/// Sorts conjuncts by printed form and nests them to the right.
fn build_conjunction(conjuncts: Vec<Formula>) -> Formula {
    let mut keyed: Vec<(String, Formula)> = conjuncts
        .into_iter()
        .filter(|c| *c != Formula::True)
        .map(|c| (to_text(&c), c))
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    let mut iter = keyed.into_iter().rev().map(|(_, f)| f);
    let Some(last) = iter.next() else {
        return Formula::True;
    };
    iter.fold(last, |acc, f| Formula::and(f, acc))
}

fn flatten_and(f: Formula, out: &mut Vec<Formula>) {
    match f {
        Formula::And(l, r) => {
            flatten_and(*l, out);
            flatten_and(*r, out);
        }
        other => out.push(other),
    }
}

fn negate(f: Formula) -> Formula {
    match f {
        Formula::Not(inner) => *inner,
        other => Formula::not(other),
    }
}

fn canon(f: &Formula) -> Formula {
    match f {
        Formula::True => Formula::True,
        Formula::Atom(a) => Formula::Atom(a.clone()),
        Formula::Not(inner) => negate(canon(inner)),
        Formula::And(l, r) => {
            let mut parts = Vec::new();
            flatten_and(canon(l), &mut parts);
            flatten_and(canon(r), &mut parts);
            build_conjunction(parts)
        }
        Formula::Or(l, r) => canon(&Formula::not(Formula::and(
            Formula::not((**l).clone()),
            Formula::not((**r).clone()),
        ))),
        Formula::Implies(l, r) => canon(&Formula::not(Formula::and(
            (**l).clone(),
            Formula::not((**r).clone()),
        ))),
        Formula::Next(inner) => Formula::next(canon(inner)),
        Formula::Until(l, r) => Formula::until(canon(l), canon(r)),
        Formula::Finally(inner) => Formula::until(Formula::True, canon(inner)),
        Formula::Globally(inner) => negate(Formula::until(Formula::True, negate(canon(inner)))),
    }
}
