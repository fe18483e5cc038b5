//! Experiment plumbing: configuration, evaluation reports, perturbation and
//! dynamics tests, SVG plots, run manifests and the command-line driver.

pub mod cli;
mod config;
mod experiment;
mod manifest;
mod plot;
mod report;

pub use config::{EvalSection, ExperimentConfig, ExperimentSection, ImitationSection, PpoSection};
pub use experiment::Experiment;
pub use manifest::{sha256_hex, RunManifest};
pub use plot::{line_chart, Table};
pub use report::{dynamics_variation_eval, evaluate, perturb_eval, EvaluationReport};

use std::path::Path;

use crate::curriculum::CurriculumError;
use crate::imitation::ImitationError;
use crate::learner::LearnerError;
use crate::morphology::MorphError;
use crate::physics::SceneError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Morph(#[from] MorphError),
    #[error(transparent)]
    Imitation(#[from] ImitationError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Curriculum(#[from] CurriculumError),
    #[error("run failed: {0}")]
    Failed(String),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        Self::Io(format!("{}: {e}", path.display()))
    }

    /// 1 for configuration and input problems, 2 for failed runs.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Scene(_) | Self::Morph(_) => 1,
            Self::Imitation(ImitationError::Parse { .. } | ImitationError::Script(_) | ImitationError::Config(_) | ImitationError::Mismatch(_) | ImitationError::InvalidClip(_)) => 1,
            Self::Learner(LearnerError::Checkpoint { .. } | LearnerError::Config(_)) => 1,
            _ => 2,
        }
    }
}
