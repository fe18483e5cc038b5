//! Clipped-surrogate policy optimization.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::Adam;
use super::gae::{gae, normalize, GaeConfig};
use super::mlp::MlpCache;
use super::policy::Agent;
use super::rollout::{collect_rollouts, Environment, Mode, TrajectoryBatch};
use super::LearnerError;

#[derive(Clone, Debug, PartialEq)]
pub struct PpoConfig {
    pub clip_eps: f64,
    pub epochs: usize,
    pub minibatch_size: usize,
    pub learning_rate: f64,
    /// Decay the learning rate linearly to zero over `iterations`.
    pub lr_decay: bool,
    pub samples_per_iteration: usize,
    pub iterations: usize,
    pub entropy_coef: f64,
    pub max_grad_norm: f64,
    /// Approximate-KL guard that stops the remaining epochs of an iteration.
    pub max_kl: f64,
    pub gae: GaeConfig,
    pub workers: usize,
    pub hidden: Vec<usize>,
    pub init_log_std: f64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            clip_eps: 0.2,
            epochs: 4,
            minibatch_size: 512,
            learning_rate: 3e-4,
            lr_decay: true,
            samples_per_iteration: 40_000,
            iterations: 300,
            entropy_coef: 0.0,
            max_grad_norm: 0.5,
            max_kl: 0.5,
            gae: GaeConfig::default(),
            workers: 1,
            hidden: vec![64, 64],
            init_log_std: -1.0,
        }
    }
}

/// Flattened training data. Observations are already normalized with the
/// filter that the update will use.
#[derive(Clone, Debug, Default)]
pub struct PpoBatch {
    pub obs: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
    pub log_probs: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl PpoBatch {
    pub fn len(&self) -> usize {
        self.obs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.is_empty()
    }

    /// Builds training data from complete episodes: refreshes `old` log-probs
    /// and values under `agent`'s current filter, runs GAE per episode
    /// (bootstrapping truncated episodes) and normalizes advantages.
    pub fn from_episodes(agent: &Agent, batch: &TrajectoryBatch, cfg: GaeConfig) -> Self {
        let mut out = PpoBatch::default();
        for ep in &batch.episodes {
            let mut values = Vec::with_capacity(ep.len() + 1);
            for (o, a) in ep.obs.iter().zip(&ep.actions) {
                let x = agent.obs_norm.apply(o);
                let mean = agent.policy.net.forward(&x);
                out.log_probs.push(agent.policy.log_prob(&mean, a));
                values.push(agent.value.forward(&x));
                out.obs.push(x);
                out.actions.push(a.clone());
            }
            values.push(if ep.terminated { 0.0 } else { agent.value_of(&ep.final_obs) });
            let mut done = vec![false; ep.len()];
            if let Some(d) = done.last_mut() {
                *d = ep.terminated;
            }
            let (adv, ret) = gae(&ep.rewards, &values, &done, cfg);
            out.advantages.extend(adv);
            out.returns.extend(ret);
        }
        normalize(&mut out.advantages);
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
    pub entropy: f64,
    pub epochs: usize,
    pub kl_stopped: bool,
}

/// Optimizer state carried across iterations.
#[derive(Clone, Debug)]
pub struct Optimizers {
    pub policy: Adam,
    pub value: Adam,
}

impl Optimizers {
    pub fn new(agent: &Agent) -> Self {
        Self {
            policy: Adam::new(agent.policy.param_count()),
            value: Adam::new(agent.value.net.params.len()),
        }
    }
}

fn clip_norm(g: &mut [f64], max: f64) {
    if !(max > 0.0) {
        return;
    }
    let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > max {
        let s = max / n;
        g.iter_mut().for_each(|x| *x *= s);
    }
}

/// Gradient of the clipped-surrogate loss `−mean(min(ρA, clip(ρ)A))`
/// (minus the entropy bonus) with respect to the policy parameters, over the
/// samples `idx`. Returns `(loss, approx_kl, clipped_count)` sums alongside.
pub fn policy_gradient(agent: &Agent, batch: &PpoBatch, idx: &[usize], clip_eps: f64, entropy_coef: f64, grad: &mut [f64]) -> (f64, f64, usize) {
    let net = &agent.policy.net;
    let n_net = net.params.len();
    let log_std = &agent.policy.log_std;
    let inv_var: Vec<f64> = log_std.iter().map(|l| (-2.0 * l).exp()).collect();
    let b = idx.len() as f64;
    let (mut loss, mut kl, mut clipped) = (0.0, 0.0, 0usize);
    let mut cache = MlpCache::default();
    let mut d_mean = vec![0.0; log_std.len()];
    for &i in idx {
        net.forward_cached(&batch.obs[i], &mut cache);
        let mean = cache.output();
        let a = &batch.actions[i];
        let logp = agent.policy.log_prob(mean, a);
        let ratio = (logp - batch.log_probs[i]).exp();
        let adv = batch.advantages[i];
        let clipped_ratio = ratio.clamp(1.0 - clip_eps, 1.0 + clip_eps);
        loss -= (ratio * adv).min(clipped_ratio * adv);
        kl += (ratio - 1.0) - (logp - batch.log_probs[i]);
        let active = !((adv >= 0.0 && ratio > 1.0 + clip_eps) || (adv < 0.0 && ratio < 1.0 - clip_eps));
        if !active {
            clipped += 1;
        }
        // d loss / d logp
        let c = if active { -ratio * adv / b } else { 0.0 };
        for k in 0..d_mean.len() {
            let diff = a[k] - mean[k];
            d_mean[k] = c * diff * inv_var[k];
            grad[n_net + k] += c * (diff * diff * inv_var[k] - 1.0);
        }
        if c != 0.0 {
            net.backward(&cache, &d_mean, &mut grad[..n_net]);
        }
    }
    for g in &mut grad[n_net..] {
        *g -= entropy_coef;
    }
    (loss - entropy_coef * agent.policy.entropy() * b, kl, clipped)
}

/// Gradient of `0.5·mean((V − R)²)`; returns the summed squared error.
pub fn value_gradient(agent: &Agent, batch: &PpoBatch, idx: &[usize], grad: &mut [f64]) -> f64 {
    let net = &agent.value.net;
    let b = idx.len() as f64;
    let mut cache = MlpCache::default();
    let mut sq = 0.0;
    for &i in idx {
        net.forward_cached(&batch.obs[i], &mut cache);
        let err = cache.output()[0] - batch.returns[i];
        sq += err * err;
        net.backward(&cache, &[err / b], grad);
    }
    sq
}

/// Several epochs of shuffled minibatch updates of policy and critic.
pub fn ppo_update(agent: &mut Agent, batch: &PpoBatch, cfg: &PpoConfig, opt: &mut Optimizers, lr: f64, rng: &mut ChaCha8Rng) -> Result<UpdateStats, LearnerError> {
    let n = batch.len();
    let mut stats = UpdateStats::default();
    if n == 0 {
        return Ok(stats);
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mb = cfg.minibatch_size.clamp(1, n);
    let mut params = agent.policy.params();
    for epoch in 0..cfg.epochs {
        order.shuffle(rng);
        let (mut loss, mut vloss, mut kl, mut clipped) = (0.0, 0.0, 0.0, 0);
        for chunk in order.chunks(mb) {
            let mut g = vec![0.0; params.len()];
            let (l, k, c) = policy_gradient(agent, batch, chunk, cfg.clip_eps, cfg.entropy_coef, &mut g);
            let mut gv = vec![0.0; agent.value.net.params.len()];
            let sq = value_gradient(agent, batch, chunk, &mut gv);
            if !(l.is_finite() && sq.is_finite()) || g.iter().chain(&gv).any(|x| !x.is_finite()) {
                return Err(LearnerError::Diverged);
            }
            clip_norm(&mut g, cfg.max_grad_norm);
            clip_norm(&mut gv, cfg.max_grad_norm);
            opt.policy.step(&mut params, &g, lr);
            agent.policy.set_params(&params);
            opt.value.step(&mut agent.value.net.params, &gv, lr);
            loss += l;
            vloss += sq;
            kl += k;
            clipped += c;
        }
        stats = UpdateStats {
            policy_loss: loss / n as f64,
            value_loss: vloss / n as f64,
            approx_kl: kl / n as f64,
            clip_fraction: clipped as f64 / n as f64,
            entropy: agent.policy.entropy(),
            epochs: epoch + 1,
            kl_stopped: false,
        };
        if stats.approx_kl > cfg.max_kl {
            stats.kl_stopped = true;
            break;
        }
    }
    Ok(stats)
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationStats {
    pub iteration: usize,
    pub samples: usize,
    pub episodes: usize,
    pub mean_return: f64,
    pub mean_length: f64,
    pub update: UpdateStats,
}

impl IterationStats {
    pub const CSV_HEADER: &'static str = "iteration,samples,episodes,mean_return,mean_length,approx_kl,policy_loss,value_loss,entropy,clip_fraction,epochs";

    pub fn csv_row(&self) -> String {
        let u = &self.update;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.iteration, self.samples, self.episodes, self.mean_return, self.mean_length, u.approx_kl, u.policy_loss, u.value_loss, u.entropy, u.clip_fraction, u.epochs
        )
    }
}

/// PPO training loop state: agent, optimizers and a seeded generator.
#[derive(Clone, Debug)]
pub struct Trainer {
    pub agent: Agent,
    pub cfg: PpoConfig,
    pub opt: Optimizers,
    /// Iterations completed so far (drives the learning-rate schedule).
    pub iteration: usize,
    pub seed: u64,
    rng: ChaCha8Rng,
}

impl Trainer {
    pub fn new(agent: Agent, cfg: PpoConfig, seed: u64) -> Self {
        let opt = Optimizers::new(&agent);
        Self {
            agent,
            cfg,
            opt,
            iteration: 0,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0x5e_ed0f_0097),
        }
    }

    /// Fresh agent sized for `env`.
    pub fn for_env<E: Environment>(env: &E, cfg: PpoConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let agent = Agent::new(env.obs_dim(), env.action_dim(), &cfg.hidden, cfg.init_log_std, &mut rng);
        Self::new(agent, cfg, seed)
    }

    /// Replaces the agent, keeping the iteration count and resetting the
    /// optimizer moments.
    pub fn load_agent(&mut self, agent: Agent) {
        self.opt = Optimizers::new(&agent);
        self.agent = agent;
    }

    pub fn learning_rate(&self) -> f64 {
        if self.cfg.lr_decay && self.cfg.iterations > 0 {
            self.cfg.learning_rate * (1.0 - self.iteration as f64 / self.cfg.iterations as f64).max(0.0)
        } else {
            self.cfg.learning_rate
        }
    }

    /// Collect one batch, refresh the observation filter, update.
    pub fn iterate<E, F>(&mut self, env_factory: F) -> Result<IterationStats, LearnerError>
    where
        E: Environment,
        F: Fn(usize) -> E + Sync,
    {
        let collect_seed = self.seed.wrapping_mul(1_000_003).wrapping_add(self.iteration as u64 * 7919);
        let batch = collect_rollouts(&self.agent, env_factory, self.cfg.samples_per_iteration, self.cfg.workers, collect_seed, Mode::Stochastic)?;
        self.agent.obs_norm.update(batch.episodes.iter().flat_map(|e| e.obs.iter().map(Vec::as_slice)));
        let data = PpoBatch::from_episodes(&self.agent, &batch, self.cfg.gae);
        let lr = self.learning_rate();
        let update = ppo_update(&mut self.agent, &data, &self.cfg, &mut self.opt, lr, &mut self.rng)?;
        self.iteration += 1;
        Ok(IterationStats {
            iteration: self.iteration,
            samples: batch.samples(),
            episodes: batch.episodes.len(),
            mean_return: batch.mean_return(),
            mean_length: batch.mean_length(),
            update,
        })
    }
}
