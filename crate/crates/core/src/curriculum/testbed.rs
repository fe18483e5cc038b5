//! Synthetic 1-DOF point tracking, fast enough to exercise schedulers in
//! seconds.
//!
//! A unit point mass follows `x̄(t) = A sin(ωt + φ)` under a bounded
//! acceleration command plus a constant per-shape disturbance. The episode
//! ends early when the tracking error exceeds a threshold.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ladder::ShapeLadder;
use crate::learner::{Environment, PpoConfig, Step};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackingParams {
    /// s
    pub dt: f64,
    pub horizon: usize,
    /// m
    pub amplitude: f64,
    /// rad/s
    pub omega: f64,
    /// m/s², bound on the commanded acceleration.
    pub max_accel: f64,
    /// m, error at which the episode terminates.
    pub max_error: f64,
    /// m, tracking reward is `exp(−(e/σ)²)`.
    pub sigma: f64,
    /// Draw the reference phase from the reset seed.
    pub random_phase: bool,
}

impl Default for TrackingParams {
    fn default() -> Self {
        Self {
            dt: 0.05,
            horizon: 60,
            amplitude: 0.5,
            omega: 2.0,
            max_accel: 6.5,
            max_error: 0.25,
            sigma: 0.1,
            random_phase: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PointTrackingEnv {
    pub params: TrackingParams,
    /// m/s², constant disturbance.
    pub disturbance: f64,
    x: f64,
    v: f64,
    phase: f64,
    k: usize,
}

impl PointTrackingEnv {
    pub fn new(params: TrackingParams, disturbance: f64) -> Self {
        Self {
            params,
            disturbance,
            x: 0.0,
            v: 0.0,
            phase: 0.0,
            k: 0,
        }
    }

    fn reference(&self, k: usize) -> (f64, f64) {
        let p = &self.params;
        let a = p.omega * k as f64 * p.dt + self.phase;
        (p.amplitude * a.sin(), p.amplitude * p.omega * a.cos())
    }

    fn observe(&self) -> Vec<f64> {
        let (xr, vr) = self.reference(self.k);
        vec![self.x - xr, self.v - vr, xr, vr]
    }

    pub fn error(&self) -> f64 {
        self.x - self.reference(self.k).0
    }
}

impl Environment for PointTrackingEnv {
    fn obs_dim(&self) -> usize {
        4
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn horizon(&self) -> usize {
        self.params.horizon
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        self.phase = if self.params.random_phase {
            ChaCha8Rng::seed_from_u64(seed).random_range(0.0..std::f64::consts::TAU)
        } else {
            0.0
        };
        self.k = 0;
        (self.x, self.v) = self.reference(0);
        self.observe()
    }

    /// `action[0]` is clamped to `[-1, 1]` and scaled by `max_accel`.
    fn step(&mut self, action: &[f64]) -> Step {
        let p = self.params;
        let u = action[0].clamp(-1.0, 1.0) * p.max_accel + self.disturbance;
        self.v += u * p.dt;
        self.x += self.v * p.dt;
        self.k += 1;
        let e = self.error();
        let r = (-(e / p.sigma).powi(2)).exp();
        Step {
            obs: self.observe(),
            reward: r,
            tracking: r,
            terminated: e.abs() > p.max_error,
            truncated: self.k >= p.horizon,
        }
    }
}

/// Disturbance profiles for six-shape ladders.
pub mod profiles {
    /// Every shape is a small perturbation of the source.
    pub const EASY: [f64; 6] = [0.0, 0.2, -0.2, 0.3, -0.3, 0.4];
    /// Easy, hard, easy, easy, hard, medium. Hard shapes push harder than
    /// the actuator can, in the opposite direction to the target's push.
    pub const HARD_MIDDLE: [f64; 6] = [0.0, 7.0, 0.3, -0.3, 7.0, -4.0];
}

#[derive(Clone, Debug)]
pub struct SyntheticLadder {
    pub params: TrackingParams,
    pub disturbances: Vec<f64>,
}

impl SyntheticLadder {
    pub fn new(params: TrackingParams, disturbances: &[f64]) -> Self {
        assert!(!disturbances.is_empty());
        Self {
            params,
            disturbances: disturbances.to_vec(),
        }
    }

    pub fn easy() -> Self {
        Self::new(TrackingParams::default(), &profiles::EASY)
    }

    pub fn hard_middle() -> Self {
        Self::new(TrackingParams::default(), &profiles::HARD_MIDDLE)
    }

    /// Every shape identical to the source.
    pub fn uniform(shapes: usize) -> Self {
        Self::new(TrackingParams::default(), &vec![0.0; shapes])
    }

    /// Small, fast PPO settings that learn a shape in tens of iterations.
    pub fn ppo(iterations: usize) -> PpoConfig {
        PpoConfig {
            samples_per_iteration: 2000,
            minibatch_size: 256,
            learning_rate: 3e-3,
            iterations,
            hidden: vec![32, 32],
            ..PpoConfig::default()
        }
    }
}

impl ShapeLadder for SyntheticLadder {
    type Env = PointTrackingEnv;

    fn len(&self) -> usize {
        self.disturbances.len()
    }

    fn env(&self, shape: usize) -> PointTrackingEnv {
        PointTrackingEnv::new(self.params, self.disturbances[shape])
    }

    fn label(&self, shape: usize) -> String {
        format!("d{:+.1}", self.disturbances[shape])
    }
}
