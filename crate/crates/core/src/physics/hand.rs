//! Planar articulated hand in reduced coordinates.
//!
//! Generalized coordinates are `[x, y, θ, q_1 .. q_J]`: the palm (root) pose
//! followed by the revolute joint angles of every finger chain in order.
//! Link 0 is the palm; link `k + 1` is driven by joint `k`.

use super::math::{wrap_angle, Pose2, Vec2};
use super::shape::{Capsule, Shape};
use super::PhysicsError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdGains {
    pub kp: f64,
    pub kd: f64,
}

impl PdGains {
    /// `kd = 2·sqrt(kp)`.
    pub fn critical(kp: f64) -> Self {
        Self {
            kp,
            kd: 2.0 * kp.sqrt(),
        }
    }
}

impl Default for PdGains {
    fn default() -> Self {
        Self::critical(300.0)
    }
}

/// One capsule link extending along the local x axis from its joint.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkSpec {
    pub length: f64,
    pub radius: f64,
    pub mass: f64,
    pub limits: [f64; 2],
    pub gains: PdGains,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FingerChain {
    /// Joint position of the first link, in the palm frame.
    pub base: Vec2,
    /// Rest direction of the first link relative to the palm.
    pub base_angle: f64,
    pub links: Vec<LinkSpec>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HandModel {
    pub name: String,
    /// Palm collision capsule in the root frame.
    pub palm: Capsule,
    pub palm_mass: f64,
    pub fingers: Vec<FingerChain>,
    /// Gains for the x, y and θ root DOFs.
    pub root_gains: [PdGains; 3],
    /// Root pinned in place (no root DOFs move).
    pub fixed_root: bool,
    /// Integrate the damping term implicitly, as stable PD requires.
    pub implicit_damping: bool,
}

/// Articulated state. Lengths follow the owning [`HandModel`].
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
    pub root_pose: Pose2,
    /// (vx, vy, ω)
    pub root_velocity: [f64; 3],
}

impl JointState {
    pub fn at_rest(hand: &HandModel, root_pose: Pose2) -> Self {
        let j = hand.joint_count();
        Self {
            q: vec![0.0; j],
            qdot: vec![0.0; j],
            root_pose,
            root_velocity: [0.0; 3],
        }
    }

    /// `[vx, vy, ω, q̇...]`
    pub fn generalized_velocity(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(3 + self.q.len());
        v.extend_from_slice(&self.root_velocity);
        v.extend_from_slice(&self.qdot);
        v
    }

    pub fn set_generalized_velocity(&mut self, v: &[f64]) {
        self.root_velocity.copy_from_slice(&v[..3]);
        self.qdot.copy_from_slice(&v[3..]);
    }

    pub fn is_finite(&self) -> bool {
        self.root_pose.is_finite()
            && self.root_velocity.iter().all(|x| x.is_finite())
            && self.q.iter().chain(&self.qdot).all(|x| x.is_finite())
    }
}

/// Inertia of a uniform capsule about its center.
pub fn capsule_inertia(mass: f64, length: f64, radius: f64) -> f64 {
    let rect_area = 2.0 * radius * length;
    let disk_area = std::f64::consts::PI * radius * radius;
    let total = rect_area + disk_area;
    if total <= 0.0 {
        return 0.0;
    }
    let m_rect = mass * rect_area / total;
    let m_half = 0.5 * mass * disk_area / total;
    let rect = m_rect * (length * length + 4.0 * radius * radius) / 12.0;
    let centroid = 4.0 * radius / (3.0 * std::f64::consts::PI);
    let half = m_half * radius * radius / 2.0 + m_half * (length * length / 4.0 + length * centroid);
    rect + 2.0 * half
}

impl HandModel {
    /// Two fingers of three links each hanging off a horizontal palm.
    pub fn planar_default() -> Self {
        let link = |length: f64| LinkSpec {
            length,
            radius: 0.008,
            mass: 0.02,
            limits: [-1.6, 1.6],
            gains: PdGains::default(),
        };
        let chain = |x: f64, angle: f64| FingerChain {
            base: Vec2::new(x, 0.0),
            base_angle: angle,
            links: vec![link(0.045), link(0.035), link(0.03)],
        };
        Self {
            name: "hand".into(),
            palm: Capsule::new(Vec2::new(-0.05, 0.0), Vec2::new(0.05, 0.0), 0.012),
            palm_mass: 0.3,
            fingers: vec![
                chain(-0.045, std::f64::consts::FRAC_PI_2),
                chain(0.045, std::f64::consts::FRAC_PI_2),
            ],
            root_gains: [PdGains::critical(300.0), PdGains::critical(300.0), PdGains::critical(300.0)],
            fixed_root: false,
            implicit_damping: true,
        }
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        if !(self.palm_mass > 0.0) {
            return Err(PhysicsError::InvalidMass {
                mass: self.palm_mass,
                inertia: self.palm_inertia(),
            });
        }
        for link in self.fingers.iter().flat_map(|f| &f.links) {
            if !(link.mass > 0.0) || !(link.length > 0.0) || !(link.radius > 0.0) {
                return Err(PhysicsError::InvalidHand(format!(
                    "link with mass {} length {} radius {}",
                    link.mass, link.length, link.radius
                )));
            }
            if link.limits[0] > link.limits[1] {
                return Err(PhysicsError::InvalidHand(format!("joint limits {:?}", link.limits)));
            }
            if !(link.gains.kp >= 0.0 && link.gains.kd >= 0.0) {
                return Err(PhysicsError::InvalidHand("negative gains".into()));
            }
        }
        Ok(())
    }

    pub fn joint_count(&self) -> usize {
        self.fingers.iter().map(|f| f.links.len()).sum()
    }

    pub fn link_count(&self) -> usize {
        1 + self.joint_count()
    }

    pub fn dof(&self) -> usize {
        3 + self.joint_count()
    }

    pub fn palm_inertia(&self) -> f64 {
        capsule_inertia(self.palm_mass, (self.palm.b - self.palm.a).length(), self.palm.radius)
    }

    /// Spec of the link driven by joint `k`.
    pub fn joint_link(&self, k: usize) -> &LinkSpec {
        let mut k = k;
        for f in &self.fingers {
            if k < f.links.len() {
                return &f.links[k];
            }
            k -= f.links.len();
        }
        panic!("joint index out of range");
    }

    pub fn joint_limits(&self) -> Vec<[f64; 2]> {
        self.fingers.iter().flat_map(|f| f.links.iter().map(|l| l.limits)).collect()
    }

    /// Link index of every fingertip (last link of each chain).
    pub fn fingertip_links(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut next = 1;
        for f in &self.fingers {
            next += f.links.len();
            if !f.links.is_empty() {
                out.push(next - 1);
            }
        }
        out
    }

    /// Per-DOF gains, root first.
    pub fn dof_gains(&self) -> Vec<PdGains> {
        let mut g = self.root_gains.to_vec();
        g.extend(self.fingers.iter().flat_map(|f| f.links.iter().map(|l| l.gains)));
        g
    }

    /// Collision shape of every link in its own link frame.
    pub fn link_shapes(&self) -> Vec<Shape> {
        let mut shapes = vec![Shape::Capsule(self.palm.clone())];
        for f in &self.fingers {
            for l in &f.links {
                shapes.push(Shape::Capsule(Capsule::new(
                    Vec2::ZERO,
                    Vec2::new(l.length, 0.0),
                    l.radius,
                )));
            }
        }
        shapes
    }

    /// Parent link of each link (`None` for the palm).
    pub fn parents(&self) -> Vec<Option<usize>> {
        let mut out = vec![None];
        let mut next = 1;
        for f in &self.fingers {
            for i in 0..f.links.len() {
                out.push(Some(if i == 0 { 0 } else { next + i - 1 }));
            }
            next += f.links.len();
        }
        out
    }

    /// Frame pose of every link (palm = root frame; fingers = frame at their
    /// joint with x along the link). Root first, chains in order.
    pub fn forward_kinematics(&self, state: &JointState) -> Vec<Pose2> {
        let mut poses = Vec::with_capacity(self.link_count());
        let root = state.root_pose;
        poses.push(root);
        let mut k = 0;
        for f in &self.fingers {
            let mut frame = root.compose(&Pose2::from_parts(f.base, f.base_angle + state.q[k]));
            poses.push(frame);
            k += 1;
            for i in 1..f.links.len() {
                let prev_len = f.links[i - 1].length;
                frame = frame.compose(&Pose2::from_parts(Vec2::new(prev_len, 0.0), state.q[k]));
                poses.push(frame);
                k += 1;
            }
        }
        poses
    }

    /// Joints clamped into their limits.
    pub fn clamp_joints(&self, q: &mut [f64]) {
        for (qi, lim) in q.iter_mut().zip(self.joint_limits()) {
            *qi = qi.clamp(lim[0], lim[1]);
        }
    }
}

/// Per-step kinematic quantities of a hand, cached for Jacobian products.
#[derive(Clone, Debug)]
pub struct HandFrames {
    pub poses: Vec<Pose2>,
    /// World center of every link.
    pub centers: Vec<Vec2>,
    /// World position of every joint (`= poses[k + 1].pos`).
    pub joints: Vec<Vec2>,
    /// For each link, the joints whose motion moves it (chain prefix).
    pub ancestors: Vec<Vec<usize>>,
    pub masses: Vec<f64>,
    pub inertias: Vec<f64>,
    pub fixed_root: bool,
}

impl HandFrames {
    pub fn new(hand: &HandModel, state: &JointState) -> Self {
        let poses = hand.forward_kinematics(state);
        let mut centers = Vec::with_capacity(poses.len());
        let mut masses = Vec::with_capacity(poses.len());
        let mut inertias = Vec::with_capacity(poses.len());
        let mut ancestors = Vec::with_capacity(poses.len());
        centers.push(poses[0].transform_point((hand.palm.a + hand.palm.b) * 0.5));
        masses.push(hand.palm_mass);
        inertias.push(hand.palm_inertia());
        ancestors.push(Vec::new());
        let mut k = 0;
        for f in &hand.fingers {
            let first = k;
            for l in &f.links {
                centers.push(poses[k + 1].transform_point(Vec2::new(l.length * 0.5, 0.0)));
                masses.push(l.mass);
                inertias.push(capsule_inertia(l.mass, l.length, l.radius));
                ancestors.push((first..=k).collect());
                k += 1;
            }
        }
        let joints = poses[1..].iter().map(|p| p.pos).collect();
        Self {
            poses,
            centers,
            joints,
            ancestors,
            masses,
            inertias,
            fixed_root: hand.fixed_root,
        }
    }

    pub fn dof(&self) -> usize {
        3 + self.joints.len()
    }

    /// Row `dᵀ J(p)` for a point `p` rigidly attached to `link`.
    pub fn directional_jacobian(&self, link: usize, p: Vec2, d: Vec2, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        if !self.fixed_root {
            out[0] = d.x;
            out[1] = d.y;
            out[2] = (p - self.poses[0].pos).cross(d);
        }
        for &k in &self.ancestors[link] {
            out[3 + k] = (p - self.joints[k]).cross(d);
        }
    }

    /// Angular Jacobian row of a link.
    pub fn angular_jacobian(&self, link: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        if !self.fixed_root {
            out[2] = 1.0;
        }
        for &k in &self.ancestors[link] {
            out[3 + k] = 1.0;
        }
    }

    /// Velocity of a point attached to `link`.
    pub fn point_velocity(&self, link: usize, p: Vec2, v: &[f64]) -> Vec2 {
        let mut vel = Vec2::ZERO;
        if !self.fixed_root {
            vel = Vec2::new(v[0], v[1]) + (p - self.poses[0].pos).perp() * v[2];
        }
        for &k in &self.ancestors[link] {
            vel += (p - self.joints[k]).perp() * v[3 + k];
        }
        vel
    }

    /// Angular velocity of a link.
    pub fn link_angular_velocity(&self, link: usize, v: &[f64]) -> f64 {
        let mut w = if self.fixed_root { 0.0 } else { v[2] };
        for &k in &self.ancestors[link] {
            w += v[3 + k];
        }
        w
    }

    /// Joint-space mass matrix, row-major `n × n`.
    pub fn mass_matrix(&self) -> Vec<f64> {
        let n = self.dof();
        let mut m = vec![0.0; n * n];
        let mut jx = vec![0.0; n];
        let mut jy = vec![0.0; n];
        let mut jw = vec![0.0; n];
        for b in 0..self.centers.len() {
            let c = self.centers[b];
            self.directional_jacobian(b, c, Vec2::new(1.0, 0.0), &mut jx);
            self.directional_jacobian(b, c, Vec2::new(0.0, 1.0), &mut jy);
            self.angular_jacobian(b, &mut jw);
            let (mb, ib) = (self.masses[b], self.inertias[b]);
            for i in 0..n {
                if jx[i] == 0.0 && jy[i] == 0.0 && jw[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    m[i * n + j] += mb * (jx[i] * jx[j] + jy[i] * jy[j]) + ib * jw[i] * jw[j];
                }
            }
        }
        if self.fixed_root {
            for i in 0..3 {
                m[i * n + i] = 1.0;
            }
        }
        m
    }

    /// Velocity-product (centripetal) acceleration of a point on `link`.
    fn bias_acceleration(&self, link: usize, p: Vec2, v: &[f64]) -> Vec2 {
        let mut a = Vec2::ZERO;
        let mut w = if self.fixed_root { 0.0 } else { v[2] };
        let mut from = self.poses[0].pos;
        for &k in &self.ancestors[link] {
            let to = self.joints[k];
            a -= (to - from) * (w * w);
            w += v[3 + k];
            from = to;
        }
        a -= (p - from) * (w * w);
        a
    }

    /// Generalized forces `Σ Jᵀ (m·g) − Σ Jᵀ m·a_bias`.
    pub fn passive_forces(&self, v: &[f64], gravity: Vec2) -> Vec<f64> {
        let n = self.dof();
        let mut q = vec![0.0; n];
        let mut row = vec![0.0; n];
        for b in 0..self.centers.len() {
            let c = self.centers[b];
            let f = (gravity - self.bias_acceleration(b, c, v)) * self.masses[b];
            let mag = f.length();
            if mag == 0.0 {
                continue;
            }
            self.directional_jacobian(b, c, f / mag, &mut row);
            for i in 0..n {
                q[i] += row[i] * mag;
            }
        }
        q
    }

    /// Kinetic energy `½ vᵀ M v`.
    pub fn kinetic_energy(&self, v: &[f64]) -> f64 {
        let mut e = 0.0;
        for b in 0..self.centers.len() {
            let vc = self.point_velocity(b, self.centers[b], v);
            let w = self.link_angular_velocity(b, v);
            e += 0.5 * self.masses[b] * vc.length_squared() + 0.5 * self.inertias[b] * w * w;
        }
        e
    }
}

/// Wrapped PD error for the θ DOF, plain difference elsewhere.
pub(crate) fn dof_error(dof: usize, value: f64, target: f64) -> f64 {
    if dof == 2 {
        wrap_angle(value - target)
    } else {
        value - target
    }
}
