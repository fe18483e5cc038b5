//! Observation vector assembly.
//!
//! | block               | entries per hand / object                          |
//! |---------------------|----------------------------------------------------|
//! | sim hand state      | x, y, cos θ, sin θ, (cos q_j, sin q_j)…  = 4 + 2J  |
//! | sim hand velocity   | vx, vy, ω, q̇_j…                          = 3 + J   |
//! | sim object          | x, y, cos θ, sin θ, vx, vy, ω             = 7       |
//! | reference hand      | as sim hand state                         = 4 + 2J  |
//! | reference object    | x, y, cos θ, sin θ                        = 4       |
//! | hand difference     | Δx, Δy, Δθ, Δq_j…  (reference − sim)      = 3 + J   |
//! | object difference   | Δx, Δy, Δθ         (reference − sim)      = 3       |
//! | contact sensors     | one force magnitude per link              = N       |
//!
//! With several hands every hand block is repeated per hand, in hand order.

use super::clip::{ClipFrame, HandPose};
use crate::physics::{angle_diff, ContactVector, JointState, Pose2, SimWorld};

/// `D(J, N) = (4+2J) + (3+J) + 7 + (4+2J) + 4 + (3+J) + 3 + N` for one
/// hand; hand blocks add up over `hands` given as `(J, N)` pairs.
pub fn observation_dim(hands: &[(usize, usize)]) -> usize {
    let per_hand: usize = hands.iter().map(|&(j, n)| (4 + 2 * j) + (3 + j) + (4 + 2 * j) + (3 + j) + n).sum();
    per_hand + 7 + 4 + 3
}

fn push_pose_state(out: &mut Vec<f64>, root: &Pose2, q: &[f64]) {
    out.extend([root.pos.x, root.pos.y, root.angle.cos(), root.angle.sin()]);
    for &x in q {
        out.push(x.cos());
        out.push(x.sin());
    }
}

fn push_hand_diff(out: &mut Vec<f64>, sim: &JointState, reference: &HandPose) {
    let (dp, da) = sim.root_pose.delta_to(&reference.root);
    out.extend([dp.x, dp.y, da]);
    for (q, qr) in sim.q.iter().zip(&reference.joints) {
        out.push(angle_diff(*qr, *q));
    }
}

/// `contacts` holds each hand's sensor vector, concatenated in hand order.
pub fn build_observation(world: &SimWorld, object: usize, reference: &ClipFrame, contacts: &ContactVector) -> Vec<f64> {
    let mut out = Vec::with_capacity(128);
    for h in &world.hands {
        push_pose_state(&mut out, &h.state.root_pose, &h.state.q);
    }
    for h in &world.hands {
        out.extend(h.state.root_velocity);
        out.extend(&h.state.qdot);
    }
    let obj = &world.bodies[object];
    out.extend([
        obj.pose.pos.x,
        obj.pose.pos.y,
        obj.pose.angle.cos(),
        obj.pose.angle.sin(),
        obj.linear_velocity.x,
        obj.linear_velocity.y,
        obj.angular_velocity,
    ]);
    for r in &reference.hands {
        push_pose_state(&mut out, &r.root, &r.joints);
    }
    let ro = &reference.object;
    out.extend([ro.pos.x, ro.pos.y, ro.angle.cos(), ro.angle.sin()]);
    for (h, r) in world.hands.iter().zip(&reference.hands) {
        push_hand_diff(&mut out, &h.state, r);
    }
    let (dp, da) = obj.pose.delta_to(ro);
    out.extend([dp.x, dp.y, da]);
    out.extend(&contacts.0);
    out
}

/// Offset of the object-difference block (Δx, Δy, Δθ).
pub fn object_diff_offset(hands: &[(usize, usize)]) -> usize {
    let n_contacts: usize = hands.iter().map(|h| h.1).sum();
    observation_dim(hands) - n_contacts - 3
}

/// Offset of the hand-difference blocks.
pub fn hand_diff_offset(hands: &[(usize, usize)]) -> usize {
    let hand_diff: usize = hands.iter().map(|h| 3 + h.0).sum();
    object_diff_offset(hands) - hand_diff
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_dimension() {
        assert_eq!(observation_dim(&[(6, 7)]), 71);
        assert_eq!(observation_dim(&[(6, 7), (6, 7)]), 71 + 57);
    }
}
