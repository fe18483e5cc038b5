//! Goodness score: normalized episode length times normalized tracking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::learner::{run_episode, Agent, Environment, Episode, Mode};

/// `f = (L / T) · (Σ_{t<L} r_t / T)`.
pub fn goodness_of(len: usize, horizon: usize, tracking_sum: f64) -> f64 {
    if horizon == 0 {
        return 0.0;
    }
    let t = horizon as f64;
    (len as f64 / t) * (tracking_sum / t)
}

pub fn episode_goodness(ep: &Episode) -> f64 {
    goodness_of(ep.len(), ep.horizon, ep.tracking.iter().sum())
}

/// `n` evaluation seeds for update round `round`, shared by every shape.
pub fn round_seeds(seed: u64, round: usize, n: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(round as u64));
    (0..n).map(|_| rng.random()).collect()
}

/// Mean goodness over one stochastic rollout per seed.
pub fn goodness<E: Environment + ?Sized>(agent: &Agent, env: &mut E, seeds: &[u64]) -> f64 {
    if seeds.is_empty() {
        return 0.0;
    }
    let total: f64 = seeds
        .iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s ^ 0xa5a5_a5a5);
            episode_goodness(&run_episode(agent, env, Mode::Stochastic, s, &mut rng))
        })
        .sum();
    total / seeds.len() as f64
}
