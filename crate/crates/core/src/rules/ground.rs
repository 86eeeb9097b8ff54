use super::kb::{Comparator, Domain, KnowledgeBase, Value};
use super::rule::{Assignment, Condition, Effect, Effects, RuleBody};
use crate::ltl::{Literal, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroundError {
    #[error("formula is not rule-shaped: {0}")]
    NotConvertible(String),
    #[error("unknown atom {0:?}")]
    UnknownAtom(String),
    #[error("action {0:?} used as a condition")]
    ActionInCondition(String),
    #[error("{0:?} is an observed feature and cannot be an effect")]
    NotAnAction(String),
    #[error("negated effect {0:?}")]
    NegatedAction(String),
    #[error("conflicting {slot} actions {first:?} and {second:?}")]
    ConflictingEffects {
        slot: &'static str,
        first: String,
        second: String,
    },
}

fn condition(lit: &Literal, kb: &KnowledgeBase) -> Result<Condition, GroundError> {
    match kb.grounding.get(&lit.atom) {
        Some(g) => Ok(Condition {
            feature: g.feature.clone(),
            cmp: if lit.positive { g.cmp } else { g.cmp.flip() },
            value: g.value.clone(),
        }),
        None if kb.action_slot(&lit.atom).is_some() => {
            Err(GroundError::ActionInCondition(lit.atom.clone()))
        }
        None => Err(GroundError::UnknownAtom(lit.atom.clone())),
    }
}

fn add_effect(lit: &Literal, kb: &KnowledgeBase, effects: &mut Effects) -> Result<(), GroundError> {
    if let Some(slot) = kb.action_slot(&lit.atom) {
        if !lit.positive {
            return Err(GroundError::NegatedAction(lit.atom.clone()));
        }
        let current = effects.slot_mut(slot);
        if let Effect::Act(prev) = current {
            if *prev != lit.atom {
                return Err(GroundError::ConflictingEffects {
                    slot: slot.as_str(),
                    first: prev.clone(),
                    second: lit.atom.clone(),
                });
            }
        }
        *current = Effect::Act(lit.atom.clone());
        return Ok(());
    }
    let Some(g) = kb.grounding.get(&lit.atom) else {
        return Err(GroundError::UnknownAtom(lit.atom.clone()));
    };
    let internal = kb.feature(&g.feature).filter(|f| f.internal);
    let Some(def) = internal else {
        return Err(GroundError::NotAnAction(lit.atom.clone()));
    };
    // `x = v` asserted directly; negation is only expressible for booleans.
    let value = match (g.cmp == Comparator::Eq, lit.positive, &def.domain, &g.value) {
        (true, true, _, v) => v.clone(),
        (eq, pos, Domain::Bool, Value::Bool(b)) => Value::Bool(*b == (eq == pos)),
        _ => return Err(GroundError::NegatedAction(lit.atom.clone())),
    };
    effects.sets.push(Assignment {
        feature: g.feature.clone(),
        value,
    });
    Ok(())
}

/// Maps a convertible verdict onto knowledge-base features and actions.
///
/// Antecedent literals become preconditions (negation flips the
/// comparator). Consequent literals must name actions or internal
/// features. Slots with no action become `pass`.
pub fn ground(verdict: &Verdict, kb: &KnowledgeBase) -> Result<RuleBody, GroundError> {
    let (antecedent, consequent) = match verdict {
        Verdict::Convertible {
            antecedent,
            consequent,
        } => (antecedent, consequent),
        Verdict::InferenceError { reason } => {
            return Err(GroundError::NotConvertible(reason.clone()))
        }
    };
    let mut preconditions = antecedent
        .iter()
        .map(|l| condition(l, kb))
        .collect::<Result<Vec<_>, _>>()?;
    preconditions.sort();
    preconditions.dedup();
    let mut effects = Effects::default();
    for lit in consequent {
        add_effect(lit, kb, &mut effects)?;
    }
    Ok(RuleBody {
        preconditions,
        effects,
    }
    .canonical())
}
