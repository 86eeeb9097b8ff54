//! Utility learning from reference behaviour.
//!
//! Each slot reward `R` is split over the rules that fired since the last
//! reward for that slot, a rule fired at step `s` receiving
//! `R - beta * (t - s)`. Utilities then move toward their reward:
//! `u <- u + alpha * (r - u)`.

mod episode;
mod evaluate;
mod train;

pub use episode::{
    episodes_from_records, read_episodes, to_jsonl, validate_episodes, write_episodes, Episode,
    EpisodeSchemaError, Step, StepRecord,
};
pub use evaluate::{evaluate_agreement, Agreement};
pub use train::{
    reward_decompose, reward_decompose_firings, train, train_checked, train_with,
    utility_update, CurvePoint, LearningCurve, TrainConfig, TrainError, Trainer,
};
