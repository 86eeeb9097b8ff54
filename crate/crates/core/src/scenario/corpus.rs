use std::path::Path;

use serde::{Deserialize, Serialize};

use super::archetype::Archetype;

/// A driver's description of how they act, with a candidate translation
/// and, when known, the gold formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperienceText {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: std::path::PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub fn read_corpus(path: &Path) -> Result<Vec<ExperienceText>, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CorpusError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// The small synthetic corpus bundled for each archetype.
pub fn experience_texts(archetype: Archetype) -> Vec<ExperienceText> {
    let raw = match archetype {
        Archetype::HighwayCutIn => include_str!("../../fixtures/corpus/highway_cut_in.json"),
        Archetype::SignalizedIntersection => {
            include_str!("../../fixtures/corpus/signalized_intersection.json")
        }
        Archetype::LaneChangeInterference => {
            include_str!("../../fixtures/corpus/lane_change_interference.json")
        }
    };
    serde_json::from_str(raw).expect("bundled corpus is valid JSON")
}
