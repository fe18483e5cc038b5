//! Imitation reward and early termination.

use serde::{Deserialize, Serialize};

use super::clip::ClipFrame;
use crate::physics::{angle_diff, JointState, Pose2, SimWorld};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    pub w_od: f64,
    pub w_or: f64,
    pub w_hd: f64,
    pub w_hr: f64,
    pub w_hj: f64,
    /// m⁻²
    pub k_od: f64,
    /// rad⁻²
    pub k_or: f64,
    pub k_hd: f64,
    pub k_hr: f64,
    pub k_hj: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            w_od: 4.0,
            w_or: 4.0,
            w_hd: 0.05,
            w_hr: 0.05,
            w_hj: 0.1,
            k_od: 200.0,
            k_or: 1.8,
            k_hd: 50.0,
            k_hr: 1.0,
            k_hj: 1.0,
        }
    }
}

impl RewardConfig {
    /// Reward of perfect tracking, `Σ w`.
    pub fn max_total(&self) -> f64 {
        (self.w_od + self.w_or) + ((self.w_hd + self.w_hr) + self.w_hj)
    }

    pub fn validate(&self) -> Result<(), String> {
        let w = [self.w_od, self.w_or, self.w_hd, self.w_hr, self.w_hj];
        let k = [self.k_od, self.k_or, self.k_hd, self.k_hr, self.k_hj];
        if w.iter().any(|x| !(*x >= 0.0)) {
            return Err("reward weights must be non-negative".into());
        }
        if k.iter().any(|x| !(*x > 0.0)) {
            return Err("reward scales must be positive".into());
        }
        if !(self.max_total() > 0.0) {
            return Err("at least one reward weight must be positive".into());
        }
        Ok(())
    }
}

/// Squared tracking errors, summed over links or joints where applicable.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Deviations {
    pub object_pos: f64,
    pub object_rot: f64,
    pub link_pos: f64,
    pub link_rot: f64,
    pub joints: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RewardTerms {
    pub od: f64,
    pub or: f64,
    pub hd: f64,
    pub hr: f64,
    pub hj: f64,
    pub total: f64,
}

impl RewardTerms {
    pub fn from_deviations(d: &Deviations, cfg: &RewardConfig) -> Self {
        let od = (-cfg.k_od * d.object_pos).exp();
        let or = (-cfg.k_or * d.object_rot).exp();
        let hd = (-cfg.k_hd * d.link_pos).exp();
        let hr = (-cfg.k_hr * d.link_rot).exp();
        let hj = (-cfg.k_hj * d.joints).exp();
        Self {
            od,
            or,
            hd,
            hr,
            hj,
            total: (cfg.w_od * od + cfg.w_or * or) + ((cfg.w_hd * hd + cfg.w_hr * hr) + cfg.w_hj * hj),
        }
    }
}

/// Squared deviations of the simulation from a reference frame.
pub fn deviations(world: &SimWorld, object: usize, reference: &ClipFrame) -> Deviations {
    let obj = &world.bodies[object].pose;
    let mut d = Deviations {
        object_pos: (reference.object.pos - obj.pos).length_squared(),
        object_rot: angle_diff(reference.object.angle, obj.angle).powi(2),
        ..Deviations::default()
    };
    for (hand, target) in world.hands.iter().zip(&reference.hands) {
        let ref_state = JointState {
            q: target.joints.clone(),
            qdot: vec![0.0; target.joints.len()],
            root_pose: target.root,
            root_velocity: [0.0; 3],
        };
        let sim_links = hand.model.forward_kinematics(&hand.state);
        let ref_links = hand.model.forward_kinematics(&ref_state);
        for (s, r) in sim_links.iter().zip(&ref_links) {
            d.link_pos += (r.pos - s.pos).length_squared();
            d.link_rot += angle_diff(r.angle, s.angle).powi(2);
        }
        for (q, qr) in hand.state.q.iter().zip(&target.joints) {
            d.joints += angle_diff(*qr, *q).powi(2);
        }
    }
    d
}

pub fn reward(world: &SimWorld, object: usize, reference: &ClipFrame, cfg: &RewardConfig) -> RewardTerms {
    RewardTerms::from_deviations(&deviations(world, object, reference), cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TerminationThresholds {
    /// m
    pub d_thr: f64,
    /// rad
    pub phi_thr: f64,
}

impl Default for TerminationThresholds {
    fn default() -> Self {
        Self {
            d_thr: 0.10,
            phi_thr: std::f64::consts::FRAC_PI_3,
        }
    }
}

/// True when the object strays beyond either threshold.
pub fn check_termination(sim_object: &Pose2, ref_object: &Pose2, thr: &TerminationThresholds) -> bool {
    (sim_object.pos - ref_object.pos).length() > thr.d_thr || angle_diff(ref_object.angle, sim_object.angle).abs() > thr.phi_thr
}
