//! Keyframed motion scripts, played back through the simulator to produce
//! physically consistent reference clips.
//!
//! ```toml
//! duration = 4.0
//! frame_rate = 120.0
//! easing = "cosine"
//!
//! [[hand]]
//! keys = [
//!   { t = 0.0, root = [0.0, 0.0, 0.0], q = [0.3, 0.4, 0.3, -0.3, -0.4, -0.3] },
//!   { t = 4.0, root = [0.0, 0.0, 1.5707963267948966], q = [0.3, 0.4, 0.3, -0.3, -0.4, -0.3] },
//! ]
//! gait = [ { joint = 0, amplitude = 0.05, period = 1.0 } ]
//!
//! [[object]]
//! t = 0.0
//! pose = [0.0, 0.09, 0.0]
//! ```

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::clip::{ClipFrame, HandPose, ReferenceClip};
use super::env::{substeps_per_control, WorldTemplate};
use super::reward::TerminationThresholds;
use super::ImitationError;
use crate::physics::{angle_diff, stable_pd, PdTargets, Pose2};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Easing {
    Linear,
    #[default]
    Cosine,
}

impl Easing {
    fn apply(self, u: f64) -> f64 {
        match self {
            Easing::Linear => u,
            Easing::Cosine => 0.5 * (1.0 - (PI * u).cos()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandKey {
    pub t: f64,
    pub root: [f64; 3],
    pub q: Vec<f64>,
}

/// `amplitude · sin(2π (t − start) / period + phase)` added to one joint
/// while `start ≤ t < end`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gait {
    pub joint: usize,
    pub amplitude: f64,
    pub period: f64,
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub start: f64,
    pub end: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandScript {
    pub keys: Vec<HandKey>,
    #[serde(default)]
    pub gait: Vec<Gait>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectKey {
    pub t: f64,
    pub pose: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptSpec {
    /// s
    #[serde(default = "default_duration")]
    pub duration: f64,
    /// Hz, rate of the recorded clip.
    #[serde(default = "default_frame_rate")]
    pub frame_rate: f64,
    #[serde(default)]
    pub easing: Easing,
    /// Allowed drift of the simulated object from the scripted object path.
    #[serde(default)]
    pub reject: TerminationThresholds,
    pub hand: Vec<HandScript>,
    pub object: Vec<ObjectKey>,
}

fn default_duration() -> f64 {
    4.0
}

fn default_frame_rate() -> f64 {
    120.0
}

/// Segment index and eased fraction for `t` among key times `ts`.
fn locate(ts: &[f64], t: f64, easing: Easing) -> (usize, f64) {
    if ts.len() == 1 || t <= ts[0] {
        return (0, 0.0);
    }
    let last = ts.len() - 1;
    if t >= ts[last] {
        return (last - 1, 1.0);
    }
    let i = ts.windows(2).position(|w| t < w[1]).unwrap_or(last - 1);
    let span = ts[i + 1] - ts[i];
    let u = if span > 0.0 { (t - ts[i]) / span } else { 1.0 };
    (i, easing.apply(u))
}

fn lerp(a: f64, b: f64, u: f64) -> f64 {
    a + u * (b - a)
}

impl ScriptSpec {
    pub fn parse(text: &str) -> Result<Self, ImitationError> {
        let s: Self = toml::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ImitationError> {
        let text = std::fs::read_to_string(path).map_err(|e| ImitationError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("script serializes")
    }

    pub fn validate(&self) -> Result<(), ImitationError> {
        let bad = |m: String| ImitationError::Config(m);
        if !(self.duration > 0.0 && self.frame_rate > 0.0) {
            return Err(bad("duration and frame_rate must be positive".into()));
        }
        if self.hand.is_empty() || self.object.is_empty() {
            return Err(bad("script needs at least one hand and one object key".into()));
        }
        let sorted = |ts: &mut dyn Iterator<Item = f64>| {
            let v: Vec<f64> = ts.collect();
            v.iter().all(|t| t.is_finite()) && v.windows(2).all(|w| w[0] <= w[1])
        };
        if !sorted(&mut self.object.iter().map(|k| k.t)) {
            return Err(bad("object keys must be in time order".into()));
        }
        for (i, h) in self.hand.iter().enumerate() {
            if h.keys.is_empty() {
                return Err(bad(format!("hand {i} has no keys")));
            }
            if !sorted(&mut h.keys.iter().map(|k| k.t)) {
                return Err(bad(format!("hand {i} keys must be in time order")));
            }
            let j = h.keys[0].q.len();
            if h.keys.iter().any(|k| k.q.len() != j) {
                return Err(bad(format!("hand {i} keys disagree on joint count")));
            }
            if let Some(g) = h.gait.iter().find(|g| g.joint >= j || !(g.period > 0.0)) {
                return Err(bad(format!("hand {i}: invalid gait on joint {}", g.joint)));
            }
        }
        Ok(())
    }

    /// Frames in the recorded clip.
    pub fn frame_count(&self) -> usize {
        (self.duration * self.frame_rate).round() as usize
    }

    /// Scripted hand pose (before joint limits) at `t`.
    pub fn hand_at(&self, hand: usize, t: f64) -> HandPose {
        let h = &self.hand[hand];
        let ts: Vec<f64> = h.keys.iter().map(|k| k.t).collect();
        let (i, u) = locate(&ts, t, self.easing);
        let a = &h.keys[i];
        let b = h.keys.get(i + 1).unwrap_or(a);
        let mut joints: Vec<f64> = a.q.iter().zip(&b.q).map(|(x, y)| lerp(*x, *y, u)).collect();
        for g in &h.gait {
            if t >= g.start && g.end.is_none_or(|e| t < e) {
                joints[g.joint] += g.amplitude * (2.0 * PI * (t - g.start) / g.period + g.phase).sin();
            }
        }
        HandPose {
            root: Pose2::new(lerp(a.root[0], b.root[0], u), lerp(a.root[1], b.root[1], u), lerp(a.root[2], b.root[2], u)),
            joints,
        }
    }

    /// Scripted object pose at `t`.
    pub fn object_at(&self, t: f64) -> Pose2 {
        let ts: Vec<f64> = self.object.iter().map(|k| k.t).collect();
        let (i, u) = locate(&ts, t, self.easing);
        let a = self.object[i].pose;
        let b = self.object.get(i + 1).map_or(a, |k| k.pose);
        Pose2::new(lerp(a[0], b[0], u), lerp(a[1], b[1], u), lerp(a[2], b[2], u))
    }

    pub fn frame_at(&self, t: f64) -> ClipFrame {
        ClipFrame {
            hands: (0..self.hand.len()).map(|h| self.hand_at(h, t)).collect(),
            object: self.object_at(t),
        }
    }
}

/// Drives the scene's hands toward the script with stable PD (targets
/// refreshed every substep) while the object moves freely, and records the
/// simulated poses at the script's frame rate.
pub fn generate_reference(script: &ScriptSpec, template: &WorldTemplate) -> Result<ReferenceClip, ImitationError> {
    script.validate()?;
    let world0 = &template.world;
    if script.hand.len() != world0.hands.len() {
        return Err(ImitationError::Mismatch(format!("script has {} hands, scene has {}", script.hand.len(), world0.hands.len())));
    }
    for (i, (s, h)) in script.hand.iter().zip(&world0.hands).enumerate() {
        if s.keys[0].q.len() != h.model.joint_count() {
            return Err(ImitationError::Mismatch(format!("hand {i}: script has {} joints, model has {}", s.keys[0].q.len(), h.model.joint_count())));
        }
    }
    let per_frame = substeps_per_control(world0.substep_rate, script.frame_rate)?;
    let n = script.frame_count();
    let mut start = script.frame_at(0.0);
    for (p, h) in start.hands.iter_mut().zip(&world0.hands) {
        h.model.clamp_joints(&mut p.joints);
    }
    let mut world = template.pose_world(&start);
    world.time = 0.0;
    let dt = world.substep_dt();
    let gains: Vec<_> = world.hands.iter().map(|h| h.model.dof_gains()).collect();
    let obj = template.object;
    let mut frames = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / script.frame_rate;
        let pose = world.bodies[obj].pose;
        let intent = script.object_at(t);
        let drift = (pose.pos - intent.pos).length();
        let turn = angle_diff(intent.angle, pose.angle).abs();
        if drift > script.reject.d_thr || turn > script.reject.phi_thr {
            return Err(ImitationError::ScriptInfeasible {
                time: t,
                reason: format!("object off its scripted path by {:.4} m, {:.1} deg", drift, turn.to_degrees()),
            });
        }
        frames.push(ClipFrame {
            hands: world
                .hands
                .iter()
                .map(|h| HandPose {
                    root: h.state.root_pose,
                    joints: h.state.q.clone(),
                })
                .collect(),
            object: pose,
        });
        if i + 1 == n {
            break;
        }
        for s in 0..per_frame {
            let ts = t + (s + 1) as f64 * dt;
            let mut tau = Vec::with_capacity(world.actuation_len());
            for (k, h) in world.hands.iter().enumerate() {
                let mut p = script.hand_at(k, ts);
                h.model.clamp_joints(&mut p.joints);
                let targets = PdTargets { root: p.root, q: p.joints };
                tau.extend(stable_pd(&h.state, &targets, &gains[k], dt));
            }
            world.step(&tau, dt).map_err(|e| ImitationError::ScriptInfeasible {
                time: world.time,
                reason: e.to_string(),
            })?;
        }
    }
    ReferenceClip::new(script.frame_rate, frames)
}
