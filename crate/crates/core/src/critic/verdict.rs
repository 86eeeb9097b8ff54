use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticVerdict {
    pub approved: bool,
    /// Empty only for approvals.
    pub feedback: String,
}

impl CriticVerdict {
    pub fn approve() -> Self {
        CriticVerdict {
            approved: true,
            feedback: String::new(),
        }
    }

    pub fn revise(feedback: impl Into<String>) -> Self {
        let feedback = feedback.into();
        CriticVerdict {
            approved: false,
            feedback: if feedback.trim().is_empty() {
                "(empty critic reply)".into()
            } else {
                feedback
            },
        }
    }
}

/// Parses a critic reply under the `APPROVED` / `REVISE: <feedback>`
/// contract. Anything else is a disapproval carrying the raw reply.
pub fn parse_verdict(reply: &str) -> CriticVerdict {
    let trimmed = reply.trim();
    let head = trimmed.trim_end_matches('.');
    if head.eq_ignore_ascii_case("approved") {
        return CriticVerdict::approve();
    }
    if let Some(rest) = strip_prefix_ci(trimmed, "REVISE:") {
        let rest = rest.trim();
        if !rest.is_empty() {
            return CriticVerdict::revise(rest);
        }
    }
    log::warn!("unparseable critic reply treated as disapproval: {trimmed:?}");
    CriticVerdict::revise(trimmed)
}

fn strip_prefix_ci<'a>(s: &'a str, prefix: &str) -> Option<&'a str> {
    let head = s.get(..prefix.len())?;
    head.eq_ignore_ascii_case(prefix).then(|| &s[prefix.len()..])
}
