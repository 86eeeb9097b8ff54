//! Deterministic stand-ins for the language models, used by the bundled
//! fixture configs, the examples and the tests.
//!
//! The scripts understand the minimal prompt templates and the grounding
//! prompt of the compiler; they are not general translators.

use crate::critic::extract_formula;
use crate::llm::{ChatMessage, Role, ScriptRegistry, ScriptedBackend, SharedBackend};
use crate::ltl::{self, Formula};
use crate::rules::{KnowledgeBase, REPAIR_INSTRUCTION, SUPPLY_INSTRUCTION};

pub const REVISOR: &str = "fixture_revisor";
pub const STRICT_CRITIC: &str = "fixture_strict_critic";
pub const LENIENT_CRITIC: &str = "fixture_lenient_critic";
pub const DRAFTER: &str = "fixture_drafter";

/// Paraphrased atoms the strict critic knows how to correct.
pub const SYNONYMS: [(&str, &str); 5] = [
    ("car_cutting_in", "cut_in_ahead"),
    ("merging_car", "cut_in_ahead"),
    ("right_blinker", "right_signal"),
    ("pedestrian", "pedestrian_crossing"),
    ("neighbor_blinker", "adjacent_signal"),
];

fn last_user(messages: &[ChatMessage]) -> &str {
    messages
        .iter()
        .rev()
        .find(|m| m.role == Role::User)
        .map_or("", |m| m.content.as_str())
}

fn line_after<'a>(text: &'a str, marker: &str) -> Option<&'a str> {
    text.lines()
        .find_map(|l| l.trim().strip_prefix(marker))
        .map(str::trim)
}

/// Replaces whole identifier occurrences of `from` with `to`.
pub fn replace_atom(formula: &str, from: &str, to: &str) -> String {
    let mut out = String::with_capacity(formula.len());
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut String| {
        out.push_str(if word == from { to } else { word.as_str() });
        word.clear();
    };
    for c in formula.chars() {
        if c.is_ascii_alphanumeric() || c == '_' {
            word.push(c);
        } else {
            flush(&mut word, &mut out);
            out.push(c);
        }
    }
    flush(&mut word, &mut out);
    out
}

/// Applies the corrections a strict-critic complaint asks for.
pub fn apply_feedback(formula: &str, feedback: &str) -> String {
    let mut out = formula.to_string();
    if feedback.contains("use G instead of F") {
        if let Some(rest) = out.trim_start().strip_prefix('F') {
            out = format!("G{rest}");
        }
    }
    if let Some(tail) = feedback.split("unknown atom ").nth(1) {
        let mut parts = tail.split("; use ");
        let from = parts.next().unwrap_or("").trim();
        if let Some(to) = parts.next() {
            out = replace_atom(&out, from, to.trim());
        }
    }
    out
}

/// Echoes the candidate on the first turn; afterwards revises the latest
/// formula according to the feedback.
pub fn revisor() -> SharedBackend {
    ScriptedBackend::shared(REVISOR, |messages| {
        let user = last_user(messages);
        if let Some(candidate) = line_after(user, "Candidate translation:") {
            return format!("LTL: {candidate}");
        }
        let previous = messages
            .iter()
            .rev()
            .find(|m| m.role == Role::Assistant)
            .map(|m| extract_formula(&m.content))
            .unwrap_or_default();
        let feedback = line_after(user, "A reviewer disagrees:").unwrap_or("");
        format!("LTL: {}", apply_feedback(&previous, feedback))
    })
}

fn is_eventual_rule(f: &Formula) -> bool {
    matches!(f, Formula::Finally(inner) if matches!(**inner, Formula::Implies(_, _)))
}

/// Checks syntax, the atom vocabulary and the `G (... -> ...)` shape.
pub fn review(formula: &str, vocabulary: &[String]) -> String {
    let parsed = match ltl::parse(formula) {
        Ok(f) => f,
        Err(e) => return format!("REVISE: not valid LTL ({e})"),
    };
    for atom in parsed.atoms() {
        if vocabulary.iter().any(|v| v == atom) {
            continue;
        }
        return match SYNONYMS.iter().find(|(s, _)| *s == atom) {
            Some((_, known)) => format!("REVISE: unknown atom {atom}; use {known}"),
            None => format!("REVISE: unknown atom {atom}"),
        };
    }
    if is_eventual_rule(&parsed) {
        return "REVISE: a standing rule must hold always; use G instead of F".into();
    }
    "APPROVED".into()
}

pub fn strict_critic(vocabulary: Vec<String>) -> SharedBackend {
    ScriptedBackend::shared(STRICT_CRITIC, move |messages| {
        let formula = line_after(last_user(messages), "Translation:").unwrap_or("");
        review(formula, &vocabulary)
    })
}

/// Approves anything that parses.
pub fn lenient_critic() -> SharedBackend {
    ScriptedBackend::shared(LENIENT_CRITIC, |messages| {
        let formula = line_after(last_user(messages), "Translation:").unwrap_or("");
        match ltl::parse(formula) {
            Ok(_) => "APPROVED".into(),
            Err(e) => format!("REVISE: not valid LTL ({e})"),
        }
    })
}

/// Grounding model: returns the direct reading. In supply mode it also adds
/// `ego_speed = high` to braking and decelerating rules that do not
/// mention speed, when the knowledge base has that feature.
pub fn drafter() -> SharedBackend {
    ScriptedBackend::shared(DRAFTER, |messages| {
        let user = last_user(messages);
        if user.starts_with(REPAIR_INSTRUCTION) {
            return line_after(user, "Rule:").unwrap_or("").to_string();
        }
        let reading = line_after(user, "Direct reading:").unwrap_or("").to_string();
        let supply = user.contains(SUPPLY_INSTRUCTION);
        let has_speed = user.lines().any(|l| l.starts_with("feature ego_speed:"));
        let slows = ["longitudinal = brake", "longitudinal = decelerate"]
            .iter()
            .any(|p| reading.contains(p));
        if supply && has_speed && slows && !reading.contains("ego_speed") {
            if let Some((conds, effects)) = reading.split_once(" THEN ") {
                return format!("{conds} AND ego_speed = high THEN {effects}");
            }
        }
        reading
    })
}

/// Default scripts plus the fixture scripts, the strict critic checking
/// against `kb`'s atoms.
pub fn registry(kb: &KnowledgeBase) -> ScriptRegistry {
    let mut reg = ScriptRegistry::default();
    reg.register(REVISOR, revisor());
    reg.register(STRICT_CRITIC, strict_critic(kb.vocabulary()));
    reg.register(LENIENT_CRITIC, lenient_critic());
    reg.register(DRAFTER, drafter());
    reg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::complete;
    use crate::rules::{draft_messages, ground, PromptMode};
    use crate::scenario::{scenario_kb, Archetype};

    #[test]
    fn atom_replacement_is_whole_word() {
        assert_eq!(
            replace_atom("G (pedestrian -> brake) & pedestrians", "pedestrian", "pedestrian_crossing"),
            "G (pedestrian_crossing -> brake) & pedestrians"
        );
    }

    #[test]
    fn review_and_fix_converge() {
        let vocab = scenario_kb(Archetype::HighwayCutIn).vocabulary();
        let mut f = "F (car_cutting_in -> brake)".to_string();
        let mut rounds = 0;
        loop {
            let verdict = review(&f, &vocab);
            if verdict == "APPROVED" {
                break;
            }
            f = apply_feedback(&f, &verdict);
            rounds += 1;
            assert!(rounds < 5, "stuck at {f}: {verdict}");
        }
        assert_eq!(f, "G (cut_in_ahead -> brake)");
        assert_eq!(rounds, 2);
        assert!(review("G (mystery -> brake)", &vocab).starts_with("REVISE: unknown atom mystery"));
    }

    #[test]
    fn drafter_supplies_speed_only_in_supply_mode() {
        let kb = scenario_kb(Archetype::HighwayCutIn);
        let f = ltl::parse("G (cut_in_ahead -> brake & keep_lane)").unwrap();
        let reading = ground(&ltl::classify(&f), &kb).unwrap();
        let d = drafter();
        let lit = complete(d.as_ref(), &draft_messages(PromptMode::Literal, &kb, &f, &reading)).unwrap();
        let sup = complete(d.as_ref(), &draft_messages(PromptMode::Supply, &kb, &f, &reading)).unwrap();
        assert!(!lit.content.contains("ego_speed"));
        assert!(sup.content.contains("AND ego_speed = high THEN"));
    }
}
