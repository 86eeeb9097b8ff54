use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::compile::{CompileOutcome, OutcomeKind};

/// Frequency of each outcome category.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeReport {
    pub viable: usize,
    pub format_mismatch: usize,
    pub duplicated_content: usize,
    pub inference_error: usize,
}

impl OutcomeReport {
    pub fn from_kinds(kinds: impl IntoIterator<Item = OutcomeKind>) -> Self {
        let mut r = OutcomeReport::default();
        for k in kinds {
            *r.count_mut(k) += 1;
        }
        r
    }

    pub fn count(&self, kind: OutcomeKind) -> usize {
        match kind {
            OutcomeKind::Viable => self.viable,
            OutcomeKind::FormatMismatch => self.format_mismatch,
            OutcomeKind::DuplicatedContent => self.duplicated_content,
            OutcomeKind::InferenceError => self.inference_error,
        }
    }

    fn count_mut(&mut self, kind: OutcomeKind) -> &mut usize {
        match kind {
            OutcomeKind::Viable => &mut self.viable,
            OutcomeKind::FormatMismatch => &mut self.format_mismatch,
            OutcomeKind::DuplicatedContent => &mut self.duplicated_content,
            OutcomeKind::InferenceError => &mut self.inference_error,
        }
    }

    pub fn total(&self) -> usize {
        OutcomeKind::ALL.iter().map(|k| self.count(*k)).sum()
    }

    /// `category,count` rows in a fixed category order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("category,count\n");
        for k in OutcomeKind::ALL {
            out.push_str(&format!("{},{}\n", k.as_str(), self.count(k)));
        }
        out
    }
}

/// Counts outcomes by category.
pub fn outcome_report(outcomes: &[CompileOutcome]) -> OutcomeReport {
    OutcomeReport::from_kinds(outcomes.iter().map(CompileOutcome::kind))
}

/// One CSV with a row per dataset and a column per category.
pub fn outcome_table_csv(reports: &BTreeMap<String, OutcomeReport>) -> String {
    let mut out = String::from("dataset");
    for k in OutcomeKind::ALL {
        out.push(',');
        out.push_str(k.as_str());
    }
    out.push('\n');
    for (name, r) in reports {
        out.push_str(name);
        for k in OutcomeKind::ALL {
            out.push_str(&format!(",{}", r.count(k)));
        }
        out.push('\n');
    }
    out
}
