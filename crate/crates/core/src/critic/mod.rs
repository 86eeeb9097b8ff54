//! Critic Tree refinement of NL-to-LTL translations.
//!
//! A revisor model first rewrites the initial translation into the root
//! node. Level by level, every childless node is shown to a number of
//! critics sampled from a heterogeneous ensemble. A node approved by all
//! its critics is returned at once. Each disapproval feeds its feedback
//! back to the revisor, whose answer becomes a child node carrying the
//! extended conversation. When the depth budget runs out the root revision
//! is returned.

mod prompts;
mod tree;
mod verdict;

pub use prompts::{fill, PromptTemplates};
pub use tree::{
    extract_formula, CriticTree, CriticTreeConfig, CriticTreeSpec, NodeFormula, Termination,
    TraceEvent, TreeNode, TreeTrace,
};
pub use verdict::{parse_verdict, CriticVerdict};
