//! Rollout-population evaluation: success rate and completion curve.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::HarnessError;
use crate::imitation::{ImitationConfig, ImitationEnv, Perturbation, ReferenceClip, WorldTemplate};
use crate::learner::{run_episode, Agent, Environment, Mode};

#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationReport {
    pub horizon: usize,
    /// Episode length of every rollout.
    pub lengths: Vec<usize>,
    /// Whether each rollout finished without early termination.
    pub completed: Vec<bool>,
    /// Σ r_total / Σ w per rollout.
    pub returns: Vec<f64>,
}

impl EvaluationReport {
    pub fn rollouts(&self) -> usize {
        self.lengths.len()
    }

    pub fn successes(&self) -> usize {
        self.completed.iter().filter(|&&c| c).count()
    }

    /// Percent of rollouts reaching the end of the clip.
    pub fn success_percent(&self) -> f64 {
        if self.rollouts() == 0 {
            return 0.0;
        }
        100.0 * self.successes() as f64 / self.rollouts() as f64
    }

    pub fn mean_return(&self) -> f64 {
        if self.rollouts() == 0 {
            return 0.0;
        }
        self.returns.iter().sum::<f64>() / self.rollouts() as f64
    }

    /// Percent of rollouts that reach frame `k`, for `k = 0..=T`. A rollout
    /// terminated at step `L` reached frames below `L`.
    pub fn completion_curve(&self) -> Vec<f64> {
        let n = self.rollouts().max(1) as f64;
        (0..=self.horizon)
            .map(|k| {
                let reached = self.lengths.iter().zip(&self.completed).filter(|(&l, &c)| c || l > k).count();
                100.0 * reached as f64 / n
            })
            .collect()
    }

    pub fn summary_csv(&self) -> String {
        format!(
            "rollouts,successes,success_percent,mean_return,horizon\n{},{},{:.4},{:.6},{}\n",
            self.rollouts(),
            self.successes(),
            self.success_percent(),
            self.mean_return(),
            self.horizon
        )
    }

    pub fn completion_csv(&self) -> String {
        let mut s = String::from("frame,completion_percent\n");
        for (k, c) in self.completion_curve().iter().enumerate() {
            let _ = writeln!(s, "{k},{c:.4}");
        }
        s
    }

    /// Writes `<prefix>_summary.csv` and `<prefix>_completion.csv` in `dir`.
    pub fn save(&self, dir: &Path, prefix: &str) -> Result<(), HarnessError> {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        for (name, body) in [("summary", self.summary_csv()), ("completion", self.completion_csv())] {
            let p = dir.join(format!("{prefix}_{name}.csv"));
            std::fs::write(&p, body).map_err(|e| HarnessError::io(&p, e))?;
        }
        Ok(())
    }
}

/// `n` rollouts of `agent` in fresh resets of `env`, seeded from `seed`.
pub fn evaluate<E: Environment + ?Sized>(agent: &Agent, env: &mut E, n: usize, mode: Mode, seed: u64) -> EvaluationReport {
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let mut report = EvaluationReport {
        horizon: env.horizon(),
        lengths: Vec::with_capacity(n),
        completed: Vec::with_capacity(n),
        returns: Vec::with_capacity(n),
    };
    for _ in 0..n {
        let s: u64 = seeds.random();
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let ep = run_episode(agent, env, mode, s, &mut rng);
        report.lengths.push(ep.len());
        report.completed.push(ep.completed());
        report.returns.push(ep.total_reward());
    }
    report
}

/// Evaluation with one fingertip push per rollout.
#[allow(clippy::too_many_arguments)]
pub fn perturb_eval(
    agent: &Agent,
    template: Arc<WorldTemplate>,
    clip: Arc<ReferenceClip>,
    cfg: ImitationConfig,
    perturbation: Perturbation,
    n: usize,
    mode: Mode,
    seed: u64,
) -> Result<EvaluationReport, HarnessError> {
    if !(perturbation.magnitude >= 0.0 && perturbation.duration >= 0.0) {
        return Err(HarnessError::Config("perturbation magnitude and duration must be non-negative".into()));
    }
    let mut env = ImitationEnv::new(template, clip, cfg)?;
    env.perturbation = Some(perturbation);
    Ok(evaluate(agent, &mut env, n, mode, seed))
}

/// Evaluation with the object's mass and friction scaled.
#[allow(clippy::too_many_arguments)]
pub fn dynamics_variation_eval(
    agent: &Agent,
    template: &WorldTemplate,
    clip: Arc<ReferenceClip>,
    cfg: ImitationConfig,
    mass_scale: f64,
    friction_scale: f64,
    n: usize,
    mode: Mode,
    seed: u64,
) -> Result<EvaluationReport, HarnessError> {
    if !(mass_scale > 0.0 && friction_scale > 0.0) {
        return Err(HarnessError::Config("mass and friction scales must be positive".into()));
    }
    let mut env = ImitationEnv::new(Arc::new(template.scaled(mass_scale, friction_scale)), clip, cfg)?;
    Ok(evaluate(agent, &mut env, n, mode, seed))
}
