//! Text form of production rules and the engine's loader.
//!
//! ```text
//! IF front_gap_closing = true AND signal != red THEN longitudinal = brake; lateral = pass
//! ```
//!
//! Effects name a slot (`longitudinal`, `lateral`) or an internal feature.
//! Omitted slots are `pass`.

use std::collections::BTreeMap;

use super::kb::{Comparator, KnowledgeBase, Slot, Value};
use super::rule::{Assignment, Condition, Effect, Effects, RuleBody};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadErrorKind {
    /// Not a rule at all.
    Syntax,
    /// References a feature, value or action the knowledge base lacks.
    Undefined,
    /// Well-formed but unusable (contradictory, no effect, ...).
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind:?}: {message}")]
pub struct LoadError {
    pub kind: LoadErrorKind,
    pub message: String,
}

fn err<T>(kind: LoadErrorKind, message: impl Into<String>) -> Result<T, LoadError> {
    Err(LoadError {
        kind,
        message: message.into(),
    })
}

pub fn render_rule_text(body: &RuleBody) -> String {
    let conds: Vec<String> = body.preconditions.iter().map(|c| c.to_string()).collect();
    let mut effects = vec![
        format!("longitudinal = {}", body.effects.longitudinal),
        format!("lateral = {}", body.effects.lateral),
    ];
    for s in &body.effects.sets {
        effects.push(format!("{} = {}", s.feature, s.value));
    }
    format!("IF {} THEN {}", conds.join(" AND "), effects.join("; "))
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Eq,
    Ne,
    Sep,
}

fn lex(text: &str) -> Result<Vec<Tok>, LoadError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '=' {
            out.push(Tok::Eq);
            i += 1;
        } else if c == '!' && chars.get(i + 1) == Some(&'=') {
            out.push(Tok::Ne);
            i += 2;
        } else if c == ';' || c == ',' {
            out.push(Tok::Sep);
            i += 1;
        } else if c.is_alphanumeric() || c == '_' || c == '-' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '-') {
                i += 1;
            }
            out.push(Tok::Word(chars[start..i].iter().collect()));
        } else {
            return err(LoadErrorKind::Syntax, format!("unexpected character {c:?}"));
        }
    }
    Ok(out)
}

struct Cursor {
    toks: Vec<Tok>,
    pos: usize,
}

impl Cursor {
    fn word(&mut self, what: &str) -> Result<String, LoadError> {
        match self.toks.get(self.pos) {
            Some(Tok::Word(w)) => {
                self.pos += 1;
                Ok(w.clone())
            }
            other => err(LoadErrorKind::Syntax, format!("expected {what}, found {other:?}")),
        }
    }

    fn keyword(&self, kw: &str) -> bool {
        matches!(self.toks.get(self.pos), Some(Tok::Word(w)) if w.eq_ignore_ascii_case(kw))
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), LoadError> {
        if self.keyword(kw) {
            self.pos += 1;
            Ok(())
        } else {
            err(LoadErrorKind::Syntax, format!("expected {kw}"))
        }
    }

    fn comparator(&mut self) -> Result<Comparator, LoadError> {
        let c = match self.toks.get(self.pos) {
            Some(Tok::Eq) => Comparator::Eq,
            Some(Tok::Ne) => Comparator::Ne,
            other => return err(LoadErrorKind::Syntax, format!("expected = or !=, found {other:?}")),
        };
        self.pos += 1;
        Ok(c)
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

fn value_for(kb: &KnowledgeBase, feature: &str, token: &str) -> Result<Value, LoadError> {
    let Some(def) = kb.feature(feature) else {
        return err(LoadErrorKind::Undefined, format!("undefined feature {feature}"));
    };
    match def.domain.parse_value(token) {
        Some(v) => Ok(v),
        None => err(
            LoadErrorKind::Undefined,
            format!("value {token} is outside the domain of {feature}"),
        ),
    }
}

/// Parses and validates rule text against `kb`, as the engine would before
/// running it.
pub fn load_rule(text: &str, kb: &KnowledgeBase) -> Result<RuleBody, LoadError> {
    let line = text
        .lines()
        .map(str::trim)
        .find(|l| l.get(..2).is_some_and(|h| h.eq_ignore_ascii_case("if")))
        .ok_or_else(|| LoadError {
            kind: LoadErrorKind::Syntax,
            message: "no line starting with IF".into(),
        })?;
    let mut cur = Cursor {
        toks: lex(line)?,
        pos: 0,
    };
    cur.expect_keyword("IF")?;
    let mut preconditions = Vec::new();
    loop {
        let feature = cur.word("feature")?;
        let cmp = cur.comparator()?;
        let token = cur.word("value")?;
        let value = value_for(kb, &feature, &token)?;
        preconditions.push(Condition {
            feature,
            cmp,
            value,
        });
        if cur.keyword("AND") {
            cur.pos += 1;
        } else {
            break;
        }
    }
    cur.expect_keyword("THEN")?;
    let mut effects = Effects::default();
    let mut assigned: BTreeMap<String, ()> = BTreeMap::new();
    loop {
        let target = cur.word("effect target")?;
        if cur.comparator()? != Comparator::Eq {
            return err(LoadErrorKind::Syntax, "effects use =");
        }
        let token = cur.word("effect value")?;
        if assigned.insert(target.clone(), ()).is_some() {
            return err(LoadErrorKind::Invalid, format!("{target} assigned twice"));
        }
        let slot = match target.as_str() {
            "longitudinal" => Some(Slot::Longitudinal),
            "lateral" => Some(Slot::Lateral),
            _ => None,
        };
        if let Some(slot) = slot {
            let effect = if token == "pass" {
                Effect::Pass
            } else if kb.actions(slot).contains(&token) {
                Effect::Act(token)
            } else {
                return err(
                    LoadErrorKind::Undefined,
                    format!("{token} is not a {} action", slot.as_str()),
                );
            };
            *effects.slot_mut(slot) = effect;
        } else {
            let value = value_for(kb, &target, &token)?;
            if !kb.feature(&target).is_some_and(|f| f.internal) {
                return err(
                    LoadErrorKind::Invalid,
                    format!("{target} is observed and cannot be set by a rule"),
                );
            }
            effects.sets.push(Assignment {
                feature: target,
                value,
            });
        }
        if cur.done() {
            break;
        }
        match cur.toks.get(cur.pos) {
            Some(Tok::Sep) => cur.pos += 1,
            other => return err(LoadErrorKind::Syntax, format!("expected ; found {other:?}")),
        }
        if cur.done() {
            break;
        }
    }
    let body = RuleBody {
        preconditions,
        effects,
    }
    .canonical();
    check_body(&body)?;
    Ok(body)
}

/// Rejects bodies the engine cannot run.
pub fn check_body(body: &RuleBody) -> Result<(), LoadError> {
    if body.preconditions.is_empty() {
        return err(LoadErrorKind::Invalid, "rule has no preconditions");
    }
    if body.effects.is_empty() {
        return err(LoadErrorKind::Invalid, "rule has no effect");
    }
    for (i, a) in body.preconditions.iter().enumerate() {
        for b in &body.preconditions[i + 1..] {
            if a.feature != b.feature {
                continue;
            }
            let clash = match (a.cmp, b.cmp) {
                (Comparator::Eq, Comparator::Eq) => a.value != b.value,
                (Comparator::Eq, Comparator::Ne) | (Comparator::Ne, Comparator::Eq) => {
                    a.value == b.value
                }
                (Comparator::Ne, Comparator::Ne) => false,
            };
            if clash {
                return err(
                    LoadErrorKind::Invalid,
                    format!("contradictory preconditions {a} and {b}"),
                );
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::kb::tests::toy_kb;

    #[test]
    fn render_then_load() {
        let text = "IF front_gap_closing = true AND signal != red THEN longitudinal = brake; lateral = pass";
        let body = load_rule(text, &toy_kb()).unwrap();
        assert_eq!(body.preconditions.len(), 2);
        assert_eq!(load_rule(&render_rule_text(&body), &toy_kb()).unwrap(), body);
    }

    #[test]
    fn tolerant_layout() {
        let body = load_rule(
            "Sure, here it is:\nif a=2 and signal=green then lateral=change_left, hazard = true",
            &toy_kb(),
        )
        .unwrap();
        assert_eq!(body.effects.longitudinal, Effect::Pass);
        assert_eq!(body.effects.sets.len(), 1);
    }

    fn kind(text: &str) -> LoadErrorKind {
        load_rule(text, &toy_kb()).unwrap_err().kind
    }

    #[test]
    fn error_taxonomy() {
        assert_eq!(kind("def rule(): pass"), LoadErrorKind::Syntax);
        assert_eq!(kind("IF a = 1 longitudinal = brake"), LoadErrorKind::Syntax);
        assert_eq!(kind("IF a 1 THEN longitudinal = brake"), LoadErrorKind::Syntax);
        assert_eq!(kind("IF zzz = 1 THEN longitudinal = brake"), LoadErrorKind::Undefined);
        assert_eq!(kind("IF a = 9 THEN longitudinal = brake"), LoadErrorKind::Undefined);
        assert_eq!(kind("IF a = 1 THEN longitudinal = fly"), LoadErrorKind::Undefined);
        assert_eq!(kind("IF a = 1 THEN lateral = brake"), LoadErrorKind::Undefined);
        assert_eq!(kind("IF a = 1 AND a = 2 THEN longitudinal = brake"), LoadErrorKind::Invalid);
        assert_eq!(kind("IF a = 1 AND a != 1 THEN longitudinal = brake"), LoadErrorKind::Invalid);
        assert_eq!(kind("IF a = 1 THEN longitudinal = pass; lateral = pass"), LoadErrorKind::Invalid);
        assert_eq!(
            kind("IF a = 1 THEN longitudinal = brake; longitudinal = keep"),
            LoadErrorKind::Invalid
        );
        assert_eq!(kind("IF a = 1 THEN signal = red"), LoadErrorKind::Invalid);
    }

    #[test]
    fn compatible_inequalities_are_fine() {
        assert!(load_rule("IF a != 1 AND a != 2 THEN longitudinal = brake", &toy_kb()).is_ok());
    }
}
