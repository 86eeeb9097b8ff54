use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Prompt templates with `{name}` placeholders.
///
/// Placeholders: `{text}` the natural-language input, `{initial}` the raw
/// candidate formula, `{formula}` the formula under review, `{feedback}` a
/// critic's complaint, `{vocabulary}` the knowledge-base atom list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptTemplates {
    pub revisor_system: String,
    pub revisor_initial: String,
    pub revisor_feedback: String,
    pub critic_system: String,
    pub critic_user: String,
}

const FILES: [&str; 5] = [
    "revisor_system.txt",
    "revisor_initial.txt",
    "revisor_feedback.txt",
    "critic_system.txt",
    "critic_user.txt",
];

impl PromptTemplates {
    /// Minimal-knowledge prompts: the LTL syntax, the reply contract and
    /// the atom vocabulary, nothing domain-specific.
    pub fn minimal() -> Self {
        PromptTemplates {
            revisor_system: "You translate natural language into Linear Temporal Logic. \
Use only the operators G, F, X, U, !, &, |, -> and the constants true/false. \
Prefer atoms from this vocabulary: {vocabulary}. \
Answer with a single line of the form `LTL: <formula>`."
                .into(),
            revisor_initial: "Sentence: {text}\nCandidate translation: {initial}\n\
Return a corrected translation."
                .into(),
            revisor_feedback: "A reviewer disagrees: {feedback}\nRevise the translation.".into(),
            critic_system: "You review LTL translations for logical correctness and for \
agreement with the user's preferences: atoms must come from {vocabulary} and rules \
should have the shape G (conditions -> actions). \
Reply `APPROVED` if the translation is right, otherwise `REVISE: <what is wrong>`."
                .into(),
            critic_user: "Sentence: {text}\nTranslation: {formula}".into(),
        }
    }

    /// Loads one `.txt` file per template from `dir`.
    pub fn load_dir(dir: &Path) -> std::io::Result<Self> {
        let read = |name: &str| fs::read_to_string(dir.join(name));
        Ok(PromptTemplates {
            revisor_system: read(FILES[0])?,
            revisor_initial: read(FILES[1])?,
            revisor_feedback: read(FILES[2])?,
            critic_system: read(FILES[3])?,
            critic_user: read(FILES[4])?,
        })
    }

    pub fn write_dir(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        for (name, body) in FILES.iter().zip([
            &self.revisor_system,
            &self.revisor_initial,
            &self.revisor_feedback,
            &self.critic_system,
            &self.critic_user,
        ]) {
            fs::write(dir.join(name), body)?;
        }
        Ok(())
    }
}

impl Default for PromptTemplates {
    fn default() -> Self {
        Self::minimal()
    }
}

/// Replaces every `{key}` in `template`. Unknown placeholders are left as is.
pub fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (k, v) in vars {
        out = out.replace(&format!("{{{k}}}"), v);
    }
    out
}
