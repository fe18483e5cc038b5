//! Gaussian MLP policies trained with clipped-surrogate policy optimization.

mod adam;
mod gae;
pub mod mlp;
mod policy;
mod ppo;
mod rollout;

pub use adam::Adam;
pub use gae::{gae, normalize, GaeConfig};
pub use mlp::{param_count, Mlp, MlpCache};
pub use policy::{gaussian_log_prob, Agent, GaussianPolicy, RunningNorm, ValueNet};
pub use ppo::{policy_gradient, ppo_update, value_gradient, IterationStats, Optimizers, PpoBatch, PpoConfig, Trainer, UpdateStats};
pub use rollout::{collect_rollouts, run_episode, Environment, Episode, Mode, Step, TrajectoryBatch};

#[derive(Debug, thiserror::Error)]
pub enum LearnerError {
    #[error("training diverged: non-finite loss or gradient")]
    Diverged,
    #[error("rollout worker {0} panicked")]
    Worker(usize),
    #[error("checkpoint line {line}: {msg}")]
    Checkpoint { line: usize, msg: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
}
