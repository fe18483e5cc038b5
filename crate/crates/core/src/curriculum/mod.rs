//! Shape curricula: goodness scoring, the per-shape policy registry, greedy
//! and naive schedules, joint-training baselines and a synthetic testbed.

mod goodness;
mod ladder;
mod registry;
mod schedule;
pub mod testbed;

pub use goodness::{episode_goodness, goodness, goodness_of, round_seeds};
pub use ladder::{MixtureEnv, MorphLadder, ShapeLadder};
pub use registry::{select_next, PolicyRegistry};
pub use schedule::{completes, evaluate_all, run_baseline, run_greedy, run_naive, BaselineKind, BaselineOutcome, CurriculumConfig, CurriculumTrace, TraceRecord};
pub use testbed::{profiles, PointTrackingEnv, SyntheticLadder, TrackingParams};

use crate::imitation::ImitationError;
use crate::learner::LearnerError;

#[derive(Debug, thiserror::Error)]
pub enum CurriculumError {
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Imitation(#[from] ImitationError),
    #[error("invalid curriculum: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
}
