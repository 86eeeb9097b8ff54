use super::kb::Comparator;
use super::rule::{Effect, RuleBody};

fn token(s: &str) -> String {
    s.to_lowercase()
}

/// Deterministic rule name: `if_<cond>__<cond>__then_<effect>__<effect>`.
///
/// Conditions are sorted first, so the name does not depend on their
/// order. A condition reads `feature_eq_value` or `feature_ne_value`;
/// effects read `long_<action>`, `lat_<action>` or `set_<feature>_<value>`.
/// `pass` slots are omitted.
pub fn name_rule(body: &RuleBody) -> String {
    let body = body.canonical();
    let conds: Vec<String> = body
        .preconditions
        .iter()
        .map(|c| {
            let cmp = match c.cmp {
                Comparator::Eq => "eq",
                Comparator::Ne => "ne",
            };
            format!("{}_{cmp}_{}", token(&c.feature), token(&c.value.to_string()))
        })
        .collect();
    let mut effects = Vec::new();
    if let Effect::Act(a) = &body.effects.longitudinal {
        effects.push(format!("long_{}", token(a)));
    }
    if let Effect::Act(a) = &body.effects.lateral {
        effects.push(format!("lat_{}", token(a)));
    }
    for s in &body.effects.sets {
        effects.push(format!("set_{}_{}", token(&s.feature), token(&s.value.to_string())));
    }
    format!("if_{}__then_{}", conds.join("__"), effects.join("__"))
}
