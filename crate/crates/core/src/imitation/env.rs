//! The imitation environment: one simulated scene tracking one clip.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::action::{apply_action, ActionBounds, ActionFilter};
use super::clip::{ClipFrame, ReferenceClip};
use super::observation::{build_observation, observation_dim};
use super::reward::{check_termination, reward, RewardConfig, RewardTerms, TerminationThresholds};
use super::ImitationError;
use crate::learner::{Agent, Environment, Mode, Step};
use crate::morphology::{mass_properties, ConvexDecomposition};
use crate::physics::{stable_pd, ContactVector, LinkForce, Pose2, RigidBody, SimWorld, Vec2};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImitationConfig {
    /// Hz; must divide the physics substep rate.
    pub control_rate: f64,
    pub reward: RewardConfig,
    pub termination: TerminationThresholds,
    pub bounds: ActionBounds,
    pub filter_alpha: f64,
}

impl Default for ImitationConfig {
    fn default() -> Self {
        Self {
            control_rate: 30.0,
            reward: RewardConfig::default(),
            termination: TerminationThresholds::default(),
            bounds: ActionBounds::default(),
            filter_alpha: 0.3,
        }
    }
}

/// A scene with its manipulated object identified.
#[derive(Clone, Debug)]
pub struct WorldTemplate {
    pub world: SimWorld,
    pub object: usize,
}

impl WorldTemplate {
    /// Adds `decomp` as a dynamic object (frame at its center of mass).
    pub fn with_object(mut world: SimWorld, name: &str, decomp: &ConvexDecomposition) -> Result<Self, ImitationError> {
        let mp = mass_properties(decomp);
        let body = RigidBody::dynamic(name, mp.mass, mp.inertia, Pose2::IDENTITY, decomp.body_parts())?;
        let object = world.add_body(body);
        Ok(Self { world, object })
    }

    /// Same scene with the object replaced by `decomp`.
    pub fn replace_object(&self, decomp: &ConvexDecomposition) -> Result<Self, ImitationError> {
        let mut t = self.clone();
        let mp = mass_properties(decomp);
        let old = &self.world.bodies[self.object];
        let mut body = RigidBody::dynamic(old.name.clone(), mp.mass, mp.inertia, Pose2::IDENTITY, decomp.body_parts())?;
        body.friction_scale = old.friction_scale;
        t.world.bodies[self.object] = body;
        Ok(t)
    }

    /// Scales the object's mass and inertia, and its friction.
    pub fn scaled(&self, mass_scale: f64, friction_scale: f64) -> Self {
        let mut t = self.clone();
        let b = &mut t.world.bodies[self.object];
        b.mass *= mass_scale;
        b.inertia *= mass_scale;
        b.friction_scale *= friction_scale;
        t
    }

    pub fn hand_joints(&self) -> Vec<usize> {
        self.world.hands.iter().map(|h| h.model.joint_count()).collect()
    }

    /// `(J, N_links)` per hand.
    pub fn hand_layout(&self) -> Vec<(usize, usize)> {
        self.world.hands.iter().map(|h| (h.model.joint_count(), h.model.link_count())).collect()
    }

    /// Places hands and object at `frame`, at rest.
    pub fn pose_world(&self, frame: &ClipFrame) -> SimWorld {
        let mut w = self.world.clone();
        for (h, r) in w.hands.iter_mut().zip(&frame.hands) {
            h.state.root_pose = r.root;
            h.state.q = r.joints.clone();
            h.state.qdot.iter_mut().for_each(|x| *x = 0.0);
            h.state.root_velocity = [0.0; 3];
        }
        let o = &mut w.bodies[self.object];
        o.pose = frame.object;
        o.linear_velocity = Vec2::ZERO;
        o.angular_velocity = 0.0;
        w
    }
}

/// Constant force on every fingertip for a window starting at a uniformly
/// drawn control step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Perturbation {
    /// N
    pub magnitude: f64,
    /// s
    pub duration: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Window {
    start: f64,
    end: f64,
    force: Vec2,
}

pub(crate) fn substeps_per_control(substep_rate: f64, control_rate: f64) -> Result<usize, ImitationError> {
    let r = substep_rate / control_rate;
    if !(r >= 1.0) || (r - r.round()).abs() > 1e-9 {
        return Err(ImitationError::Mismatch(format!("control rate {control_rate} Hz must divide the substep rate {substep_rate} Hz")));
    }
    Ok(r.round() as usize)
}

/// Applies PD targets for one control step of `substeps` physics steps.
pub(crate) fn run_control_step(world: &mut SimWorld, targets: &[crate::physics::PdTargets], substeps: usize, mut extra: impl FnMut(&mut SimWorld)) -> Result<(), ImitationError> {
    let dt = world.substep_dt();
    for _ in 0..substeps {
        let mut tau = Vec::with_capacity(world.actuation_len());
        for (h, t) in world.hands.iter().zip(targets) {
            tau.extend(stable_pd(&h.state, t, &h.model.dof_gains(), dt));
        }
        extra(world);
        world.step(&tau, dt)?;
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct ImitationEnv {
    template: Arc<WorldTemplate>,
    clip: Arc<ReferenceClip>,
    cfg: ImitationConfig,
    pub world: SimWorld,
    filter: ActionFilter,
    step_index: usize,
    horizon: usize,
    substeps: usize,
    joints: Vec<usize>,
    obs_dim: usize,
    last_obs: Vec<f64>,
    last_terms: RewardTerms,
    pub perturbation: Option<Perturbation>,
    window: Option<Window>,
}

impl ImitationEnv {
    pub fn new(template: Arc<WorldTemplate>, clip: Arc<ReferenceClip>, cfg: ImitationConfig) -> Result<Self, ImitationError> {
        cfg.reward.validate().map_err(ImitationError::Config)?;
        if clip.hand_count() != template.world.hands.len() {
            return Err(ImitationError::Mismatch(format!("clip has {} hands, scene has {}", clip.hand_count(), template.world.hands.len())));
        }
        for (i, (f, h)) in clip.frames()[0].hands.iter().zip(&template.world.hands).enumerate() {
            if f.joints.len() != h.model.joint_count() {
                return Err(ImitationError::Mismatch(format!("hand {i}: clip has {} joints, model has {}", f.joints.len(), h.model.joint_count())));
            }
        }
        let substeps = substeps_per_control(template.world.substep_rate, cfg.control_rate)?;
        let horizon = clip.steps(cfg.control_rate);
        if horizon == 0 {
            return Err(ImitationError::InvalidClip("clip shorter than one control step".into()));
        }
        let joints = template.hand_joints();
        let act_dim = joints.iter().map(|j| 3 + j).sum();
        let obs_dim = observation_dim(&template.hand_layout());
        let world = template.world.clone();
        Ok(Self {
            template,
            clip,
            cfg,
            world,
            filter: ActionFilter::new(cfg.filter_alpha, act_dim),
            step_index: 0,
            horizon,
            substeps,
            joints,
            obs_dim,
            last_obs: Vec::new(),
            last_terms: RewardTerms::default(),
            perturbation: None,
            window: None,
        })
    }

    pub fn clip(&self) -> &ReferenceClip {
        &self.clip
    }

    pub fn config(&self) -> &ImitationConfig {
        &self.cfg
    }

    pub fn object(&self) -> usize {
        self.template.object
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn last_terms(&self) -> RewardTerms {
        self.last_terms
    }

    fn reference(&self, k: usize) -> ClipFrame {
        self.clip.frame_at_step(k, self.cfg.control_rate)
    }

    fn contact_dim(&self) -> usize {
        self.world.hands.iter().map(|h| h.model.link_count()).sum()
    }

    /// Advances one control step with a physical (already scaled) action.
    pub fn step_physical(&mut self, action: &[f64]) -> Step {
        let frame = self.reference(self.step_index);
        let models: Vec<_> = self.world.hands.iter().map(|h| h.model.clone()).collect();
        let targets = apply_action(action, &frame, &models, &mut self.filter);
        self.world.reset_sensors();
        let window = self.window;
        let tips: Vec<Vec<(usize, f64)>> = models
            .iter()
            .map(|m| m.fingertip_links().into_iter().map(|l| (l, m.joint_link(l - 1).length)).collect())
            .collect();
        let result = run_control_step(&mut self.world, &targets, self.substeps, |w| {
            if let Some(win) = window {
                if w.time >= win.start - 1e-12 && w.time < win.end - 1e-12 {
                    for (hand, links) in tips.iter().enumerate() {
                        for &(link, len) in links {
                            w.link_forces.push(LinkForce {
                                hand,
                                link,
                                local_point: Vec2::new(len, 0.0),
                                force: win.force,
                            });
                        }
                    }
                }
            }
        });
        self.step_index += 1;
        if result.is_err() {
            self.last_terms = RewardTerms::default();
            return Step {
                obs: self.last_obs.clone(),
                reward: 0.0,
                tracking: 0.0,
                terminated: true,
                truncated: false,
            };
        }
        let control_dt = 1.0 / self.cfg.control_rate;
        let contacts = self.world.read_contact_sensors(control_dt);
        let next = self.reference(self.step_index);
        let object = self.template.object;
        let terms = reward(&self.world, object, &next, &self.cfg.reward);
        self.last_terms = terms;
        let terminated = check_termination(&self.world.bodies[object].pose, &next.object, &self.cfg.termination);
        let obs = build_observation(&self.world, object, &next, &contacts);
        self.last_obs = obs.clone();
        Step {
            obs,
            reward: terms.total / self.cfg.reward.max_total(),
            tracking: terms.hj,
            terminated,
            truncated: self.step_index >= self.horizon,
        }
    }
}

impl Environment for ImitationEnv {
    fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    fn action_dim(&self) -> usize {
        self.joints.iter().map(|j| 3 + j).sum()
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    /// Starts at the first clip frame. The seed only drives the
    /// perturbation window, if one is configured.
    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let frame = self.reference(0);
        self.world = self.template.pose_world(&frame);
        self.world.time = 0.0;
        self.filter.reset();
        self.step_index = 0;
        self.last_terms = RewardTerms::default();
        self.window = self.perturbation.map(|p| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = rng.random_range(0..self.horizon);
            let angle = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            let start = k as f64 / self.cfg.control_rate;
            Window {
                start,
                end: start + p.duration,
                force: Vec2::from_angle(angle) * p.magnitude,
            }
        });
        let contacts = ContactVector(vec![0.0; self.contact_dim()]);
        self.last_obs = build_observation(&self.world, self.template.object, &frame, &contacts);
        self.last_obs.clone()
    }

    /// `action` is the raw policy output, clamped to `[-1, 1]` and scaled by
    /// the configured bounds.
    fn step(&mut self, action: &[f64]) -> Step {
        let physical = self.cfg.bounds.scale(action, &self.joints);
        self.step_physical(&physical)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryStep {
    pub obs: Vec<f64>,
    pub action: Vec<f64>,
    pub terms: RewardTerms,
    pub done: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
    pub horizon: usize,
    pub terminated: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn completed(&self) -> bool {
        !self.terminated && self.steps.len() == self.horizon
    }

    /// `Σ r_total / Σ w`, at most the length.
    pub fn normalized_return(&self, cfg: &RewardConfig) -> f64 {
        self.steps.iter().map(|s| s.terms.total).sum::<f64>() / cfg.max_total()
    }
}

/// One episode with per-step reward terms. Stochastic actions are drawn from
/// a generator seeded with `seed`.
pub fn rollout(agent: &Agent, env: &mut ImitationEnv, mode: Mode, seed: u64) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut obs = env.reset(seed);
    let mut steps = Vec::with_capacity(env.horizon());
    let mut terminated = false;
    for _ in 0..env.horizon() {
        let mean = agent.act_mean(&obs);
        let action = match mode {
            Mode::Stochastic => agent.policy.sample(&mean, &mut rng),
            Mode::Deterministic => mean,
        };
        let s = env.step(&action);
        let done = s.terminated || s.truncated;
        steps.push(TrajectoryStep {
            obs: std::mem::replace(&mut obs, s.obs),
            action,
            terms: env.last_terms(),
            done,
        });
        if s.terminated {
            terminated = true;
            break;
        }
        if s.truncated {
            break;
        }
    }
    Trajectory {
        steps,
        horizon: env.horizon(),
        terminated,
    }
}
