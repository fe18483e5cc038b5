//! Greedy and naive shape curricula, and the joint-training baselines.

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::goodness::{goodness, round_seeds};
use super::ladder::{MixtureEnv, ShapeLadder};
use super::registry::{select_next, PolicyRegistry};
use super::CurriculumError;
use crate::learner::{run_episode, Agent, LearnerError, Mode, PpoConfig, Trainer};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurriculumConfig {
    /// Policy iterations between evaluation rounds (K).
    pub update_interval: usize,
    /// Goodness at or above which a shape counts as successful (d).
    pub success_threshold: f64,
    /// Total policy iterations.
    pub budget: usize,
    /// Stochastic rollouts per shape per round (E).
    pub eval_rollouts: usize,
    /// Consecutive picks of one shape before a random switch (R).
    pub starvation_limit: usize,
    /// End the run at the first round in which the target is successful.
    pub stop_on_target: bool,
}

impl Default for CurriculumConfig {
    fn default() -> Self {
        Self {
            update_interval: 20,
            success_threshold: 0.55,
            budget: 800,
            eval_rollouts: 8,
            starvation_limit: 5,
            stop_on_target: false,
        }
    }
}

impl CurriculumConfig {
    pub fn validate(&self) -> Result<(), CurriculumError> {
        if self.update_interval == 0 {
            return Err(CurriculumError::Config("update_interval must be at least 1".into()));
        }
        if !(self.success_threshold > 0.0 && self.success_threshold < 1.0) {
            return Err(CurriculumError::Config("success_threshold must lie in (0, 1)".into()));
        }
        if self.eval_rollouts == 0 {
            return Err(CurriculumError::Config("eval_rollouts must be at least 1".into()));
        }
        Ok(())
    }
}

/// Goodness of `agent` on every shape, all shapes using the same seeds.
pub fn evaluate_all<L: ShapeLadder>(agent: &Agent, ladder: &L, seeds: &[u64]) -> Vec<f64> {
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..ladder.len())
            .map(|j| {
                s.spawn(move || {
                    let mut env = ladder.env(j);
                    goodness(agent, &mut env, seeds)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("evaluation thread panicked")).collect()
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    /// Policy iterations completed when the round was evaluated.
    pub iteration: usize,
    /// Shape trained since the previous round.
    pub trained: Option<usize>,
    /// Shape chosen for the next interval.
    pub selected: Option<usize>,
    /// Fresh goodness of the current policy per shape.
    pub scores: Vec<f64>,
    /// Registry scores after the update.
    pub best: Vec<f64>,
    pub successful: Vec<bool>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CurriculumTrace {
    pub records: Vec<TraceRecord>,
    /// Iterations lost to diverged updates, with the shape being trained.
    pub divergences: Vec<(usize, usize)>,
}

impl CurriculumTrace {
    pub fn csv_header(shapes: usize) -> String {
        let mut h = String::from("iteration,trained_shape,selected_shape");
        for prefix in ["score", "best", "success"] {
            for j in 0..shapes {
                let _ = write!(h, ",{prefix}_{j}");
            }
        }
        h
    }

    /// Shape columns use `-1` for "none".
    pub fn to_csv(&self) -> String {
        let shapes = self.records.first().map_or(0, |r| r.scores.len());
        let mut s = Self::csv_header(shapes);
        s.push('\n');
        let id = |x: Option<usize>| x.map_or("-1".to_string(), |v| v.to_string());
        for r in &self.records {
            let _ = write!(s, "{},{},{}", r.iteration, id(r.trained), id(r.selected));
            for x in r.scores.iter().chain(&r.best) {
                let _ = write!(s, ",{x:.6}");
            }
            for &b in &r.successful {
                let _ = write!(s, ",{}", u8::from(b));
            }
            s.push('\n');
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<(), CurriculumError> {
        std::fs::write(path, self.to_csv()).map_err(|e| CurriculumError::Io(format!("{}: {e}", path.display())))
    }

    /// Iteration at which shape `j` first reached the threshold.
    pub fn first_success(&self, j: usize) -> Option<usize> {
        self.records.iter().find(|r| r.successful[j]).map(|r| r.iteration)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Schedule {
    Greedy,
    Naive,
}

fn run_schedule<L: ShapeLadder>(
    ladder: &L,
    source: &Agent,
    ppo: &PpoConfig,
    cfg: &CurriculumConfig,
    seed: u64,
    schedule: Schedule,
) -> Result<(PolicyRegistry, CurriculumTrace), CurriculumError> {
    cfg.validate()?;
    let n = ladder.len();
    let target = ladder.target();
    let d = cfg.success_threshold;
    let mut ppo = ppo.clone();
    ppo.iterations = cfg.budget;
    let mut trainer = Trainer::new(source.clone(), ppo, seed);
    let mut reg = PolicyRegistry::new(source, n);
    let mut trace = CurriculumTrace::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x00c0_ffee);
    let mut history: Vec<usize> = Vec::new();
    let mut naive_current = 0;
    let mut trained: Option<usize> = None;
    let mut round = 0;
    let mut evaluate = true;
    loop {
        let mut record = None;
        if evaluate {
            let seeds = round_seeds(seed, round, cfg.eval_rollouts);
            round += 1;
            let scores = evaluate_all(&trainer.agent, ladder, &seeds);
            reg.update(&trainer.agent, &scores, &seeds, trainer.iteration, d);
            record = Some(TraceRecord {
                iteration: trainer.iteration,
                trained,
                selected: None,
                scores,
                best: reg.scores.clone(),
                successful: (0..n).map(|j| reg.successful(j, d)).collect(),
            });
        }
        let done = trainer.iteration >= cfg.budget || (cfg.stop_on_target && reg.successful(target, d));
        let next = if done {
            None
        } else {
            Some(match schedule {
                Schedule::Greedy => select_next(&reg.scores, cfg, &history, &mut rng),
                Schedule::Naive => {
                    while naive_current < target && reg.successful(naive_current, d) {
                        naive_current += 1;
                    }
                    naive_current
                }
            })
        };
        if let Some(mut r) = record {
            r.selected = next;
            trace.records.push(r);
        }
        let Some(shape) = next else { break };
        history.push(shape);
        // greedy always resumes from the registry; naive keeps its policy
        if schedule == Schedule::Greedy {
            trainer.load_agent(reg.policies[shape].clone());
        }
        let steps = cfg.update_interval.min(cfg.budget - trainer.iteration);
        evaluate = true;
        for _ in 0..steps {
            match trainer.iterate(|_| ladder.env(shape)) {
                Ok(_) => {}
                Err(LearnerError::Diverged) => {
                    trace.divergences.push((trainer.iteration, shape));
                    trainer.iteration += 1;
                    trainer.load_agent(reg.policies[shape].clone());
                    evaluate = false;
                    break;
                }
                Err(e) => return Err(e.into()),
            }
        }
        trained = Some(shape);
    }
    Ok((reg, trace))
}

/// Every `K` iterations: evaluate, keep strictly better policies per shape,
/// then resume the best unsuccessful shape from its stored policy.
pub fn run_greedy<L: ShapeLadder>(
    ladder: &L,
    source: &Agent,
    ppo: &PpoConfig,
    cfg: &CurriculumConfig,
    seed: u64,
) -> Result<(PolicyRegistry, CurriculumTrace), CurriculumError> {
    run_schedule(ladder, source, ppo, cfg, seed, Schedule::Greedy)
}

/// Trains shapes in ladder order, moving on only once the current one is
/// successful.
pub fn run_naive<L: ShapeLadder>(
    ladder: &L,
    source: &Agent,
    ppo: &PpoConfig,
    cfg: &CurriculumConfig,
    seed: u64,
) -> Result<(PolicyRegistry, CurriculumTrace), CurriculumError> {
    run_schedule(ladder, source, ppo, cfg, seed, Schedule::Naive)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    DirectTarget,
    SourcePlusTarget,
    AllMorphs,
}

impl std::str::FromStr for BaselineKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "direct-target" => Ok(Self::DirectTarget),
            "source-plus-target" => Ok(Self::SourcePlusTarget),
            "all-morphs" => Ok(Self::AllMorphs),
            _ => Err(format!("unknown baseline `{s}` (direct-target|source-plus-target|all-morphs)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BaselineOutcome {
    pub agent: Agent,
    /// A deterministic rollout on the target finishes without termination.
    pub success: bool,
    pub iterations: usize,
}

/// Plain PPO for `cfg.budget` iterations on the shapes selected by `kind`.
pub fn run_baseline<L: ShapeLadder>(
    kind: BaselineKind,
    ladder: &L,
    source: &Agent,
    ppo: &PpoConfig,
    cfg: &CurriculumConfig,
    seed: u64,
) -> Result<BaselineOutcome, CurriculumError> {
    let target = ladder.target();
    let shapes: Vec<usize> = match kind {
        BaselineKind::DirectTarget => vec![target],
        BaselineKind::SourcePlusTarget => vec![0, target],
        BaselineKind::AllMorphs => (0..ladder.len()).collect(),
    };
    let mut ppo = ppo.clone();
    ppo.iterations = cfg.budget;
    let mut trainer = Trainer::new(source.clone(), ppo, seed);
    for _ in 0..cfg.budget {
        trainer.iterate(|_| MixtureEnv::new(shapes.iter().map(|&j| ladder.env(j)).collect()))?;
    }
    let success = cfg.budget > 0 && completes(&trainer.agent, ladder, target, seed);
    Ok(BaselineOutcome {
        agent: trainer.agent,
        success,
        iterations: cfg.budget,
    })
}

/// Deterministic rollout on `shape` reaches the clip end.
pub fn completes<L: ShapeLadder>(agent: &Agent, ladder: &L, shape: usize, seed: u64) -> bool {
    let mut env = ladder.env(shape);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_episode(agent, &mut env, Mode::Deterministic, seed, &mut rng).completed()
}
