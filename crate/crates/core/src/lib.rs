pub mod crl;
pub mod cli;
pub mod critic;
pub mod engine;
pub mod llm;
pub mod ltl;
pub mod metrics;
pub mod pipeline;
pub mod rules;
pub mod scenario;
