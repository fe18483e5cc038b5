//! Delta actions relative to the reference hand pose, with exponential
//! smoothing.

use serde::{Deserialize, Serialize};

use super::clip::ClipFrame;
use crate::physics::{HandModel, PdTargets, Pose2};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActionBounds {
    /// m, applies to Δx and Δy.
    pub translation: f64,
    /// rad, applies to Δθ and every Δq.
    pub rotation: f64,
}

impl Default for ActionBounds {
    fn default() -> Self {
        Self {
            translation: 0.05,
            rotation: 0.3,
        }
    }
}

impl ActionBounds {
    /// Maps a policy output in `[-1, 1]` per component (clamped) to a
    /// physical action for hands of `joints` joints each.
    pub fn scale(&self, raw: &[f64], joints: &[usize]) -> Vec<f64> {
        let mut out = Vec::with_capacity(raw.len());
        let mut i = 0;
        for &j in joints {
            for k in 0..3 + j {
                let bound = if k < 2 { self.translation } else { self.rotation };
                out.push(raw[i].clamp(-1.0, 1.0) * bound);
                i += 1;
            }
        }
        out
    }
}

/// `filtered = α·a + (1 − α)·previous`.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionFilter {
    pub alpha: f64,
    pub previous: Vec<f64>,
}

impl ActionFilter {
    pub fn new(alpha: f64, dim: usize) -> Self {
        assert!(alpha > 0.0 && alpha <= 1.0, "filter alpha must be in (0, 1]");
        Self {
            alpha,
            previous: vec![0.0; dim],
        }
    }

    pub fn reset(&mut self) {
        self.previous.iter_mut().for_each(|x| *x = 0.0);
    }

    pub fn apply(&mut self, a: &[f64]) -> Vec<f64> {
        for (p, x) in self.previous.iter_mut().zip(a) {
            *p = self.alpha * x + (1.0 - self.alpha) * *p;
        }
        self.previous.clone()
    }
}

/// Filters `action` (physical units, `3 + J` per hand) and offsets the
/// reference hand pose by it. Joint targets are clamped to the limits.
pub fn apply_action(action: &[f64], reference: &ClipFrame, hands: &[HandModel], filter: &mut ActionFilter) -> Vec<PdTargets> {
    let filtered = filter.apply(action);
    let mut i = 0;
    hands
        .iter()
        .zip(&reference.hands)
        .map(|(model, r)| {
            let d = &filtered[i..i + 3 + model.joint_count()];
            i += 3 + model.joint_count();
            let root = Pose2::new(r.root.pos.x + d[0], r.root.pos.y + d[1], r.root.angle + d[2]);
            let mut q: Vec<f64> = r.joints.iter().zip(&d[3..]).map(|(q, dq)| q + dq).collect();
            model.clamp_joints(&mut q);
            PdTargets { root, q }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_scales_by_alpha() {
        let mut f = ActionFilter::new(0.3, 2);
        let out = f.apply(&[0.05, 0.0]);
        assert!((out[0] - 0.015).abs() < 1e-15);
    }

    #[test]
    fn constant_input_converges_geometrically() {
        let mut f = ActionFilter::new(0.3, 1);
        let a = 0.2;
        for n in 1..=40 {
            let y = f.apply(&[a])[0];
            assert!((y - a).abs() <= 0.7f64.powi(n) * a.abs() + 1e-15);
        }
    }

    #[test]
    fn scaling_clamps() {
        let b = ActionBounds::default();
        let s = b.scale(&[2.0, -0.5, 1.0, -3.0], &[1]);
        assert_eq!(s, vec![0.05, -0.025, 0.3, -0.3]);
    }
}
