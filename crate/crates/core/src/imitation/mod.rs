//! Imitation environment: reference clips, observations, delta actions,
//! the tracking reward and early termination.

pub mod action;
pub mod clip;
pub mod env;
pub mod observation;
pub mod reward;
pub mod script;

pub use action::{apply_action, ActionBounds, ActionFilter};
pub use clip::{object_deviation, ClipFrame, HandPose, ReferenceClip};
pub use env::{rollout, ImitationConfig, ImitationEnv, Perturbation, Trajectory, TrajectoryStep, WorldTemplate};
pub use observation::{build_observation, hand_diff_offset, object_diff_offset, observation_dim};
pub use reward::{check_termination, deviations, reward, Deviations, RewardConfig, RewardTerms, TerminationThresholds};
pub use script::{generate_reference, ScriptSpec};

use crate::physics::PhysicsError;

#[derive(Debug, thiserror::Error)]
pub enum ImitationError {
    #[error("invalid clip: {0}")]
    InvalidClip(String),
    #[error("clip parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Io(String),
    #[error("script infeasible at t = {time:.3} s: {reason}")]
    ScriptInfeasible { time: f64, reason: String },
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error("script parse error: {0}")]
    Script(#[from] toml::de::Error),
    #[error("scene and clip disagree: {0}")]
    Mismatch(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}
