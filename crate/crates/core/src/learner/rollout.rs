//! Environment interface and (parallel) episode collection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::policy::Agent;
use super::LearnerError;

/// Result of one environment step.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub obs: Vec<f64>,
    pub reward: f64,
    /// Joint-tracking reward in (0, 1], used for goodness scoring.
    pub tracking: f64,
    /// Episode ended by failure (no bootstrap).
    pub terminated: bool,
    /// Episode ended by reaching the horizon.
    pub truncated: bool,
}

pub trait Environment {
    fn obs_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    /// Maximum episode length T in steps.
    fn horizon(&self) -> usize;
    fn reset(&mut self, seed: u64) -> Vec<f64>;
    fn step(&mut self, action: &[f64]) -> Step;
}

impl<E: Environment + ?Sized> Environment for Box<E> {
    fn obs_dim(&self) -> usize {
        (**self).obs_dim()
    }
    fn action_dim(&self) -> usize {
        (**self).action_dim()
    }
    fn horizon(&self) -> usize {
        (**self).horizon()
    }
    fn reset(&mut self, seed: u64) -> Vec<f64> {
        (**self).reset(seed)
    }
    fn step(&mut self, action: &[f64]) -> Step {
        (**self).step(action)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Stochastic,
    /// Always act with the mean.
    Deterministic,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "stochastic" => Ok(Mode::Stochastic),
            "deterministic" => Ok(Mode::Deterministic),
            _ => Err(format!("unknown mode `{s}` (stochastic|deterministic)")),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Episode {
    pub obs: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
    pub log_probs: Vec<f64>,
    pub rewards: Vec<f64>,
    pub tracking: Vec<f64>,
    /// Observation after the last step.
    pub final_obs: Vec<f64>,
    pub terminated: bool,
    pub horizon: usize,
}

impl Episode {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn total_reward(&self) -> f64 {
        self.rewards.iter().sum()
    }

    /// Ran the whole horizon without terminating.
    pub fn completed(&self) -> bool {
        !self.terminated && self.len() == self.horizon
    }
}

/// Runs one episode. Stochastic actions draw from `rng`.
pub fn run_episode<E: Environment + ?Sized, R: Rng>(agent: &Agent, env: &mut E, mode: Mode, env_seed: u64, rng: &mut R) -> Episode {
    let mut obs = env.reset(env_seed);
    let mut ep = Episode {
        horizon: env.horizon(),
        ..Episode::default()
    };
    for _ in 0..env.horizon() {
        let mean = agent.act_mean(&obs);
        let action = match mode {
            Mode::Stochastic => agent.policy.sample(&mean, rng),
            Mode::Deterministic => mean.clone(),
        };
        let log_prob = agent.policy.log_prob(&mean, &action);
        let step = env.step(&action);
        ep.obs.push(std::mem::replace(&mut obs, step.obs));
        ep.actions.push(action);
        ep.log_probs.push(log_prob);
        ep.rewards.push(step.reward);
        ep.tracking.push(step.tracking);
        if step.terminated {
            ep.terminated = true;
            break;
        }
        if step.truncated {
            break;
        }
    }
    ep.final_obs = obs;
    ep
}

/// Episodes in worker order; each worker's episodes in the order collected.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrajectoryBatch {
    pub episodes: Vec<Episode>,
}

impl TrajectoryBatch {
    pub fn samples(&self) -> usize {
        self.episodes.iter().map(Episode::len).sum()
    }

    pub fn mean_return(&self) -> f64 {
        mean(self.episodes.iter().map(Episode::total_reward))
    }

    pub fn mean_length(&self) -> f64 {
        mean(self.episodes.iter().map(|e| e.len() as f64))
    }
}

pub(crate) fn mean(it: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = it.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Collects at least `n_samples` steps with `n_workers` threads. Worker `w`
/// owns `env_factory(w)` and a generator seeded with `seed + w`, runs whole
/// episodes until its share is reached, and results are concatenated in
/// worker order.
pub fn collect_rollouts<E, F>(
    agent: &Agent,
    env_factory: F,
    n_samples: usize,
    n_workers: usize,
    seed: u64,
    mode: Mode,
) -> Result<TrajectoryBatch, LearnerError>
where
    E: Environment,
    F: Fn(usize) -> E + Sync,
{
    if n_workers == 0 {
        return Err(LearnerError::Config("n_workers must be at least 1".into()));
    }
    let quota = |w: usize| n_samples / n_workers + usize::from(w < n_samples % n_workers);
    let work = |w: usize| -> Vec<Episode> {
        let mut env = env_factory(w);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(w as u64));
        let mut out = Vec::new();
        let mut count = 0;
        while count < quota(w) {
            let env_seed = rng.random::<u64>();
            let ep = run_episode(agent, &mut env, mode, env_seed, &mut rng);
            count += ep.len().max(1);
            out.push(ep);
        }
        out
    };
    let per_worker: Vec<Vec<Episode>> = if n_workers == 1 {
        vec![work(0)]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..n_workers).map(|w| s.spawn(move || work(w))).collect();
            handles
                .into_iter()
                .enumerate()
                .map(|(w, h)| h.join().map_err(|_| LearnerError::Worker(w)))
                .collect::<Result<Vec<_>, _>>()
        })?
    };
    Ok(TrajectoryBatch {
        episodes: per_worker.into_iter().flatten().collect(),
    })
}
