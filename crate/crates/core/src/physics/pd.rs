//! Stable proportional-derivative actuation.
//!
//! The torque is evaluated against the next-step position estimate
//! `q + dt·q̇`. Its damping part is completed implicitly by the integrator,
//! which solves `(M + dt·Kd) q̈ = τ + …` for hands with `implicit_damping`.

use super::hand::{dof_error, HandModel, JointState, PdGains};
use super::math::Pose2;

/// PD setpoints for one hand.
#[derive(Clone, Debug, PartialEq)]
pub struct PdTargets {
    pub root: Pose2,
    pub q: Vec<f64>,
}

impl PdTargets {
    pub fn hold(state: &JointState) -> Self {
        Self {
            root: state.root_pose,
            q: state.q.clone(),
        }
    }
}

/// `τ_i = −kp_i (x_i + dt·v_i − x̄_i) − kd_i·v_i` for every DOF, root first.
pub fn stable_pd(state: &JointState, targets: &PdTargets, gains: &[PdGains], dt: f64) -> Vec<f64> {
    let n = 3 + state.q.len();
    debug_assert_eq!(gains.len(), n);
    let pos = [state.root_pose.pos.x, state.root_pose.pos.y, state.root_pose.angle];
    let tgt = [targets.root.pos.x, targets.root.pos.y, targets.root.angle];
    let mut tau = Vec::with_capacity(n);
    for i in 0..n {
        let (x, xt, v) = if i < 3 {
            (pos[i], tgt[i], state.root_velocity[i])
        } else {
            (state.q[i - 3], targets.q[i - 3], state.qdot[i - 3])
        };
        let g = gains[i];
        tau.push(-g.kp * (dof_error(i, x, xt) + dt * v) - g.kd * v);
    }
    tau
}

/// `τ_i = −kp_i (x_i − x̄_i) − kd_i·v_i`; unstable at stiff gains, kept for comparison.
pub fn explicit_pd(state: &JointState, targets: &PdTargets, gains: &[PdGains]) -> Vec<f64> {
    stable_pd(state, targets, gains, 0.0)
}

/// Stable-PD torques for a hand using the gains stored in its model.
pub fn hand_stable_pd(hand: &HandModel, state: &JointState, targets: &PdTargets, dt: f64) -> Vec<f64> {
    stable_pd(state, targets, &hand.dof_gains(), dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::hand::{FingerChain, LinkSpec};
    use crate::physics::math::Vec2;
    use crate::physics::shape::Capsule;
    use crate::physics::world::SimWorld;

    fn state(q: f64, qdot: f64) -> JointState {
        JointState {
            q: vec![q],
            qdot: vec![qdot],
            root_pose: Pose2::IDENTITY,
            root_velocity: [0.0; 3],
        }
    }

    #[test]
    fn zero_error_zero_torque() {
        let s = state(0.4, 0.0);
        let t = PdTargets::hold(&s);
        let tau = stable_pd(&s, &t, &[PdGains::critical(50.0); 4], 1.0 / 600.0);
        assert!(tau.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn pure_damping() {
        let s = state(0.4, 1.0);
        let t = PdTargets::hold(&s);
        let g = PdGains { kp: 0.0, kd: 7.5 };
        let tau = stable_pd(&s, &t, &[g; 4], 1.0 / 600.0);
        assert_eq!(tau[3], -7.5);
    }

    fn pendulum(implicit: bool) -> SimWorld {
        let kp = 1000.0;
        let hand = HandModel {
            name: "pendulum".into(),
            palm: Capsule::new(Vec2::new(-0.01, 0.0), Vec2::new(0.01, 0.0), 0.01),
            palm_mass: 1.0,
            fingers: vec![FingerChain {
                base: Vec2::ZERO,
                base_angle: -std::f64::consts::FRAC_PI_2,
                links: vec![LinkSpec {
                    length: 0.3,
                    radius: 0.01,
                    mass: 0.1,
                    limits: [-100.0, 100.0],
                    gains: PdGains::critical(kp),
                }],
            }],
            root_gains: [PdGains::critical(kp); 3],
            fixed_root: true,
            implicit_damping: implicit,
        };
        let mut w = SimWorld::new(Vec2::new(0.0, -9.81));
        w.add_hand(hand, Pose2::IDENTITY).unwrap();
        w
    }

    /// Max |q| over 10 s tracking `0.5·sin(2t)`, or infinity on blow-up.
    fn track(implicit: bool) -> f64 {
        let mut w = pendulum(implicit);
        let dt = 1.0 / 600.0;
        let mut max_q: f64 = 0.0;
        for i in 0..6000 {
            let t = i as f64 * dt;
            let h = &w.hands[0];
            let targets = PdTargets {
                root: Pose2::IDENTITY,
                q: vec![0.5 * (2.0 * t).sin()],
            };
            let tau = if implicit {
                hand_stable_pd(&h.model, &h.state, &targets, dt)
            } else {
                explicit_pd(&h.state, &targets, &h.model.dof_gains())
            };
            if w.step(&tau, dt).is_err() {
                return f64::INFINITY;
            }
            max_q = max_q.max(w.hands[0].state.q[0].abs());
        }
        max_q
    }

    #[test]
    fn stable_pd_bounded_where_explicit_diverges() {
        let stable = track(true);
        let explicit = track(false);
        assert!(stable <= 1.0, "stable max |q| = {stable}");
        assert!(explicit > 10.0, "explicit max |q| = {explicit}");
    }
}
