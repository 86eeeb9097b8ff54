//! End-to-end runs: experience texts are translated, refined by the critic
//! tree, compiled into a rule store, trained against reference episodes and
//! evaluated. Every artifact lands in one output directory together with a
//! manifest of hashes.

mod config;
mod experiment;
pub mod fixture;
mod formalize;

pub use config::{EmbeddingSpec, EvalConfig, PipelineConfig};
pub use experiment::{
    load_kb, sha256_hex, Backends, Experiment, ExperimentOutput, ExperimentReport, Manifest,
    Seeds, TranslationScores, MANIFEST,
};
pub use formalize::{par_map, Formalization, Formalizer, SegmentRecord, TRANSLATE_SYSTEM};

use std::path::PathBuf;

use crate::crl::{EpisodeSchemaError, TrainError};
use crate::llm::LlmError;
use crate::rules::{KbError, StoreError};
use crate::scenario::CorpusError;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Schema(#[from] EpisodeSchemaError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Store(#[from] StoreError),
}
