//! Simulation world and the sequential-impulse contact solver.
//!
//! Each substep: integrate velocities (hands implicitly in their PD damping),
//! detect contacts, solve normal/friction/joint-limit rows by projected
//! Gauss–Seidel, correct penetration with split (pseudo-velocity) impulses,
//! then integrate positions with semi-implicit Euler.

use std::collections::BTreeMap;

use super::body::RigidBody;
use super::collide::{collide, shapes_intersect, BodyRef, ContactPoint};
use super::dense::{dot, Cholesky};
use super::hand::{HandFrames, HandModel, JointState};
use super::math::{wrap_angle, Pose2, Vec2};
use super::shape::{Shape, WorldShape};
use super::PhysicsError;

/// Contact solver settings.
#[derive(Clone, Debug, PartialEq)]
pub struct ContactParams {
    /// Coulomb friction coefficient.
    pub friction: f64,
    /// Penetration recovery rate, 1/s.
    pub baumgarte_beta: f64,
    /// Penetration tolerated without correction, m.
    pub penetration_slop: f64,
    pub solver_iterations: usize,
    pub restitution: f64,
}

impl ContactParams {
    /// Stiff defaults for a given substep rate: 20% of the penetration is
    /// removed per substep beyond a 0.5 mm slop, and μ = 1.5.
    pub fn stiff(substep_rate: f64) -> Self {
        Self {
            friction: 1.5,
            baumgarte_beta: 0.2 * substep_rate,
            penetration_slop: 5e-4,
            solver_iterations: 12,
            restitution: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        if !(self.friction >= 0.0)
            || !(0.0..=1.0).contains(&self.restitution)
            || self.solver_iterations == 0
            || !(self.baumgarte_beta >= 0.0)
            || !(self.penetration_slop >= 0.0)
        {
            return Err(PhysicsError::InvalidContactParams(format!("{self:?}")));
        }
        Ok(())
    }
}

impl Default for ContactParams {
    fn default() -> Self {
        Self::stiff(600.0)
    }
}

#[derive(Clone, Debug)]
pub struct ArticulatedHand {
    pub model: HandModel,
    pub state: JointState,
}

/// External force on a hand link for the next step, applied at a point
/// given in the link frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkForce {
    pub hand: usize,
    pub link: usize,
    pub local_point: Vec2,
    pub force: Vec2,
}

/// Per-link summed contact force magnitudes, N. One block of `link_count`
/// entries per hand.
#[derive(Clone, Debug, PartialEq)]
pub struct ContactVector(pub Vec<f64>);

#[derive(Clone, Debug)]
pub struct SimWorld {
    pub gravity: Vec2,
    pub substep_rate: f64,
    pub contact: ContactParams,
    /// Collide non-adjacent links of the same hand.
    pub self_collision: bool,
    pub bodies: Vec<RigidBody>,
    pub hands: Vec<ArticulatedHand>,
    pub link_forces: Vec<LinkForce>,
    /// Contacts of the most recent substep with their solved impulses.
    pub contacts: Vec<ContactPoint>,
    pub time: f64,
    /// Impulse magnitude accumulated since the last sensor reset, keyed by
    /// (hand, link, body, body part).
    sensor_impulses: BTreeMap<(usize, usize, usize, usize), Vec2>,
}

const RESTITUTION_THRESHOLD: f64 = 0.01;
/// Contacts are created this far (plus the per-step travel of the fastest
/// body) ahead of touching, so fast approaches stop at the surface instead
/// of penetrating.
const SPECULATIVE_DISTANCE: f64 = 2e-3;
const MAX_SPECULATIVE_DISTANCE: f64 = 0.02;
const MAX_SPEED: f64 = 1e4;

impl SimWorld {
    pub fn new(gravity: Vec2) -> Self {
        Self {
            gravity,
            substep_rate: 600.0,
            contact: ContactParams::default(),
            self_collision: false,
            bodies: Vec::new(),
            hands: Vec::new(),
            link_forces: Vec::new(),
            contacts: Vec::new(),
            time: 0.0,
            sensor_impulses: BTreeMap::new(),
        }
    }

    pub fn substep_dt(&self) -> f64 {
        1.0 / self.substep_rate
    }

    pub fn add_body(&mut self, body: RigidBody) -> usize {
        self.bodies.push(body);
        self.bodies.len() - 1
    }

    pub fn add_hand(&mut self, model: HandModel, root: Pose2) -> Result<usize, PhysicsError> {
        model.validate()?;
        let state = JointState::at_rest(&model, root);
        self.hands.push(ArticulatedHand { model, state });
        Ok(self.hands.len() - 1)
    }

    /// Total actuation length: `Σ (3 + J)` over hands.
    pub fn actuation_len(&self) -> usize {
        self.hands.iter().map(|h| h.model.dof()).sum()
    }

    pub fn body_index(&self, name: &str) -> Option<usize> {
        self.bodies.iter().position(|b| b.name == name)
    }

    pub fn link_poses(&self, hand: usize) -> Vec<Pose2> {
        let h = &self.hands[hand];
        h.model.forward_kinematics(&h.state)
    }

    /// Clears the contact-force accumulators (start of a control step).
    pub fn reset_sensors(&mut self) {
        self.sensor_impulses.clear();
    }

    pub fn total_momentum(&self) -> Vec2 {
        self.bodies.iter().map(|b| b.momentum()).fold(Vec2::ZERO, |a, b| a + b)
    }

    /// Kinetic plus gravitational potential energy of bodies and hands.
    pub fn mechanical_energy(&self) -> f64 {
        let mut e = 0.0;
        for b in self.bodies.iter().filter(|b| b.is_dynamic()) {
            e += b.kinetic_energy() - b.mass * self.gravity.dot(b.pose.pos);
        }
        for h in &self.hands {
            let frames = HandFrames::new(&h.model, &h.state);
            let v = h.state.generalized_velocity();
            e += frames.kinetic_energy(&v);
            for (m, c) in frames.masses.iter().zip(&frames.centers) {
                e -= m * self.gravity.dot(*c);
            }
        }
        e
    }

    /// Advances one substep. `torques` holds `[fx, fy, τθ, τ_joints…]` per
    /// hand, in hand order.
    pub fn step(&mut self, torques: &[f64], dt: f64) -> Result<(), PhysicsError> {
        if torques.len() != self.actuation_len() {
            return Err(PhysicsError::ActuationLength {
                expected: self.actuation_len(),
                got: torques.len(),
            });
        }
        let mut solver = Solver::prepare(self, torques, dt)?;
        solver.solve_velocities(self);
        solver.solve_positions();
        solver.finish(self);
        self.time += dt;
        self.check_finite()
    }

    fn check_finite(&self) -> Result<(), PhysicsError> {
        for b in &self.bodies {
            if !b.is_finite()
                || b.linear_velocity.length() > MAX_SPEED
                || b.angular_velocity.abs() > MAX_SPEED
            {
                return Err(PhysicsError::Diverged { time: self.time });
            }
        }
        for h in &self.hands {
            let v = h.state.generalized_velocity();
            if !h.state.is_finite() || v.iter().any(|x| x.abs() > MAX_SPEED) {
                return Err(PhysicsError::Diverged { time: self.time });
            }
        }
        Ok(())
    }

    /// World-space parts of every body.
    fn body_shapes(&self) -> Vec<Vec<WorldShape>> {
        self.bodies
            .iter()
            .map(|b| b.parts.iter().map(|s| s.world_core(&b.pose)).collect())
            .collect()
    }

    fn hand_shapes(&self, hand: usize, poses: &[Pose2], inflate: f64) -> Vec<WorldShape> {
        self.hands[hand]
            .model
            .link_shapes()
            .into_iter()
            .zip(poses)
            .map(|(s, p)| match s {
                Shape::Capsule(c) => Shape::Capsule(c.inflated(inflate)).world_core(p),
                other => other.world_core(p),
            })
            .collect()
    }

    /// Per hand link, the summed contact force from dynamic bodies whose parts
    /// touch the link's sensor capsule (radius inflated by 10%), averaged
    /// over `control_dt`. Forces are summed as vectors per (link, part) before
    /// taking magnitudes, so balanced friction between two points cancels.
    pub fn read_contact_sensors(&self, control_dt: f64) -> ContactVector {
        let body_shapes = self.body_shapes();
        let mut out = Vec::new();
        for h in 0..self.hands.len() {
            let poses = self.link_poses(h);
            let sensors = self.hand_shapes(h, &poses, 1.1);
            let base = out.len();
            out.resize(base + sensors.len(), 0.0);
            for (&(hh, link, body, part), impulse) in &self.sensor_impulses {
                if hh != h {
                    continue;
                }
                if shapes_intersect(&sensors[link], &body_shapes[body][part]) {
                    out[base + link] += impulse.length() / control_dt;
                }
            }
        }
        ContactVector(out)
    }
}

/// One side of a constraint row.
#[derive(Clone, Debug)]
enum Side {
    Body { idx: usize, dir: Vec2, ang: f64 },
    Hand { idx: usize, jac: Vec<f64>, minv_jac: Vec<f64> },
}

#[derive(Clone, Debug)]
enum RowKind {
    Normal { contact: usize, target: f64, bias: f64 },
    Tangent { contact: usize, normal_row: usize, mu: f64 },
    Limit,
}

#[derive(Clone, Debug)]
struct Row {
    kind: RowKind,
    sides: Vec<Side>,
    eff_mass: f64,
    impulse: f64,
    pseudo_impulse: f64,
}

struct HandSolve {
    frames: HandFrames,
    factor: Cholesky,
    velocity: Vec<f64>,
    pseudo: Vec<f64>,
}

struct Solver {
    dt: f64,
    iterations: usize,
    hands: Vec<HandSolve>,
    body_pseudo: Vec<(Vec2, f64)>,
    body_inv: Vec<(f64, f64)>,
    rows: Vec<Row>,
    contacts: Vec<ContactPoint>,
}

impl Solver {
    fn prepare(world: &mut SimWorld, torques: &[f64], dt: f64) -> Result<Self, PhysicsError> {
        let g = world.gravity;
        for b in world.bodies.iter_mut().filter(|b| b.is_dynamic()) {
            b.linear_velocity += (g + b.applied_force / b.mass) * dt;
            b.angular_velocity += b.applied_torque / b.inertia * dt;
        }

        let mut hands = Vec::with_capacity(world.hands.len());
        let mut offset = 0;
        for (hi, h) in world.hands.iter().enumerate() {
            let n = h.model.dof();
            let frames = HandFrames::new(&h.model, &h.state);
            let mut a = frames.mass_matrix();
            if h.model.implicit_damping {
                for (i, gains) in h.model.dof_gains().iter().enumerate() {
                    if h.model.fixed_root && i < 3 {
                        continue;
                    }
                    a[i * n + i] += dt * gains.kd;
                }
            }
            let factor = Cholesky::factor(&a, n).ok_or(PhysicsError::Diverged { time: world.time })?;
            let mut velocity = h.state.generalized_velocity();
            let mut rhs = frames.passive_forces(&velocity, g);
            for (r, t) in rhs.iter_mut().zip(&torques[offset..offset + n]) {
                *r += t;
            }
            let mut row = vec![0.0; n];
            for lf in world.link_forces.iter().filter(|f| f.hand == hi) {
                let p = frames.poses[lf.link].transform_point(lf.local_point);
                let mag = lf.force.length();
                if mag > 0.0 {
                    frames.directional_jacobian(lf.link, p, lf.force / mag, &mut row);
                    for (r, j) in rhs.iter_mut().zip(&row) {
                        *r += j * mag;
                    }
                }
            }
            if h.model.fixed_root {
                rhs[..3].iter_mut().for_each(|x| *x = 0.0);
                velocity[..3].iter_mut().for_each(|x| *x = 0.0);
            }
            factor.solve_in_place(&mut rhs);
            for (v, acc) in velocity.iter_mut().zip(&rhs) {
                *v += dt * acc;
            }
            hands.push(HandSolve {
                frames,
                factor,
                velocity,
                pseudo: vec![0.0; n],
            });
            offset += n;
        }

        let mut solver = Self {
            dt,
            iterations: world.contact.solver_iterations,
            hands,
            body_pseudo: vec![(Vec2::ZERO, 0.0); world.bodies.len()],
            body_inv: world.bodies.iter().map(|b| (b.inv_mass(), b.inv_inertia())).collect(),
            rows: Vec::new(),
            contacts: Vec::new(),
        };
        solver.collect_contacts(world);
        solver.build_rows(world);
        Ok(solver)
    }

    /// Speculative margin covering the largest point travel in one step.
    fn speculative_margin(&self, world: &SimWorld, body_shapes: &[Vec<WorldShape>]) -> f64 {
        let mut speed: f64 = 0.0;
        for (b, shapes) in world.bodies.iter().zip(body_shapes) {
            if !b.is_dynamic() {
                continue;
            }
            let reach = shapes
                .iter()
                .flat_map(|s| s.verts.iter().map(move |v| (*v - b.pose.pos).length() + s.radius))
                .fold(0.0, f64::max);
            speed = speed.max(b.linear_velocity.length() + b.angular_velocity.abs() * reach);
        }
        for (h, hs) in world.hands.iter().zip(&self.hands) {
            for l in 0..h.model.link_count() {
                let c = hs.frames.centers[l];
                let w = hs.frames.link_angular_velocity(l, &hs.velocity);
                let v = hs.frames.point_velocity(l, c, &hs.velocity);
                speed = speed.max(v.length() + w.abs() * 0.1);
            }
        }
        (SPECULATIVE_DISTANCE + 2.0 * speed * self.dt).min(MAX_SPECULATIVE_DISTANCE)
    }

    fn collect_contacts(&mut self, world: &SimWorld) {
        let body_shapes = world.body_shapes();
        let margin = self.speculative_margin(world, &body_shapes);
        let nb = world.bodies.len();
        for i in 0..nb {
            for j in i + 1..nb {
                if !world.bodies[i].is_dynamic() && !world.bodies[j].is_dynamic() {
                    continue;
                }
                speculative_contacts(
                    BodyRef::Body(i),
                    &body_shapes[i],
                    BodyRef::Body(j),
                    &body_shapes[j],
                    margin,
                    &mut self.contacts,
                );
            }
        }
        let hand_shapes: Vec<Vec<WorldShape>> = (0..world.hands.len())
            .map(|h| world.hand_shapes(h, &self.hands[h].frames.poses, 1.0))
            .collect();
        for (h, links) in hand_shapes.iter().enumerate() {
            for (l, link_shape) in links.iter().enumerate() {
                let one = std::slice::from_ref(link_shape);
                for (b, shapes) in body_shapes.iter().enumerate() {
                    speculative_contacts(
                        BodyRef::Body(b),
                        shapes,
                        BodyRef::Link { hand: h, link: l },
                        one,
                        margin,
                        &mut self.contacts,
                    );
                }
            }
        }
        for h1 in 0..hand_shapes.len() {
            for h2 in h1 + 1..hand_shapes.len() {
                for (l1, s1) in hand_shapes[h1].iter().enumerate() {
                    for (l2, s2) in hand_shapes[h2].iter().enumerate() {
                        speculative_contacts(
                            BodyRef::Link { hand: h1, link: l1 },
                            std::slice::from_ref(s1),
                            BodyRef::Link { hand: h2, link: l2 },
                            std::slice::from_ref(s2),
                            margin,
                            &mut self.contacts,
                        );
                    }
                }
            }
        }
        if world.self_collision {
            for (h, links) in hand_shapes.iter().enumerate() {
                let parents = world.hands[h].model.parents();
                for l1 in 0..links.len() {
                    for l2 in l1 + 1..links.len() {
                        if parents[l2] == Some(l1) || parents[l1] == Some(l2) || parents[l1] == parents[l2] {
                            continue;
                        }
                        speculative_contacts(
                            BodyRef::Link { hand: h, link: l1 },
                            std::slice::from_ref(&links[l1]),
                            BodyRef::Link { hand: h, link: l2 },
                            std::slice::from_ref(&links[l2]),
                            margin,
                            &mut self.contacts,
                        );
                    }
                }
            }
        }
    }

    fn side(&self, world: &SimWorld, r: BodyRef, p: Vec2, dir: Vec2) -> Option<Side> {
        match r {
            BodyRef::Body(idx) => {
                let b = &world.bodies[idx];
                b.is_dynamic().then(|| Side::Body {
                    idx,
                    dir,
                    ang: (p - b.pose.pos).cross(dir),
                })
            }
            BodyRef::Link { hand, link } => {
                let hs = &self.hands[hand];
                let mut jac = vec![0.0; hs.frames.dof()];
                hs.frames.directional_jacobian(link, p, dir, &mut jac);
                Some(Side::Hand {
                    idx: hand,
                    minv_jac: hs.factor.solve(&jac),
                    jac,
                })
            }
        }
    }

    fn make_row(&self, world: &SimWorld, kind: RowKind, c: &ContactPoint, dir: Vec2) -> Option<Row> {
        let mut sides = Vec::with_capacity(2);
        if let Some(s) = self.side(world, c.body_a, c.position, -dir) {
            sides.push(s);
        }
        if let Some(s) = self.side(world, c.body_b, c.position, dir) {
            sides.push(s);
        }
        // Both sides on one hand: merge into a single relative Jacobian.
        if let [Side::Hand { idx: i1, jac: j1, .. }, Side::Hand { idx: i2, jac: j2, .. }] = sides.as_slice() {
            if i1 == i2 {
                let jac: Vec<f64> = j1.iter().zip(j2).map(|(a, b)| a + b).collect();
                let minv_jac = self.hands[*i1].factor.solve(&jac);
                sides = vec![Side::Hand {
                    idx: *i1,
                    jac,
                    minv_jac,
                }];
            }
        }
        let k: f64 = sides
            .iter()
            .map(|s| match s {
                Side::Body { idx, dir, ang } => {
                    let b = &world.bodies[*idx];
                    b.inv_mass() * dir.length_squared() + b.inv_inertia() * ang * ang
                }
                Side::Hand { jac, minv_jac, .. } => dot(jac, minv_jac),
            })
            .sum();
        (k > 1e-300).then(|| Row {
            kind,
            sides,
            eff_mass: 1.0 / k,
            impulse: 0.0,
            pseudo_impulse: 0.0,
        })
    }

    fn build_rows(&mut self, world: &SimWorld) {
        let params = &world.contact;
        let contacts = std::mem::take(&mut self.contacts);
        for (ci, c) in contacts.iter().enumerate() {
            let mu = params.friction * friction_scale(world, c.body_a) * friction_scale(world, c.body_b);
            let Some(mut normal) = self.make_row(
                world,
                RowKind::Normal {
                    contact: ci,
                    target: 0.0,
                    bias: params.baumgarte_beta * (c.penetration - params.penetration_slop).max(0.0),
                },
                c,
                c.normal,
            ) else {
                continue;
            };
            let vn = self.row_velocity(world, &normal);
            if let RowKind::Normal { target, .. } = &mut normal.kind {
                // A speculative contact may close its gap within this step.
                *target = c.penetration.min(0.0) / self.dt;
                if params.restitution > 0.0 && vn < -RESTITUTION_THRESHOLD {
                    *target = target.max(-params.restitution * vn);
                }
            }
            let normal_row = self.rows.len();
            self.rows.push(normal);
            if mu > 0.0 {
                if let Some(t) = self.make_row(
                    world,
                    RowKind::Tangent {
                        contact: ci,
                        normal_row,
                        mu,
                    },
                    c,
                    c.tangent(),
                ) {
                    self.rows.push(t);
                }
            }
        }
        self.contacts = contacts;

        for (hi, h) in world.hands.iter().enumerate() {
            let n = h.model.dof();
            for (k, lim) in h.model.joint_limits().iter().enumerate() {
                let q = h.state.q[k];
                let sign = if q <= lim[0] {
                    1.0
                } else if q >= lim[1] {
                    -1.0
                } else {
                    continue;
                };
                let mut jac = vec![0.0; n];
                jac[3 + k] = sign;
                let minv_jac = self.hands[hi].factor.solve(&jac);
                let kk = dot(&jac, &minv_jac);
                self.rows.push(Row {
                    kind: RowKind::Limit,
                    sides: vec![Side::Hand {
                        idx: hi,
                        jac,
                        minv_jac,
                    }],
                    eff_mass: 1.0 / kk,
                    impulse: 0.0,
                    pseudo_impulse: 0.0,
                });
            }
        }
    }

    fn row_velocity(&self, world: &SimWorld, row: &Row) -> f64 {
        row.sides
            .iter()
            .map(|s| match s {
                Side::Body { idx, dir, ang } => {
                    let b = &world.bodies[*idx];
                    b.linear_velocity.dot(*dir) + b.angular_velocity * ang
                }
                Side::Hand { idx, jac, .. } => dot(jac, &self.hands[*idx].velocity),
            })
            .sum()
    }

    fn apply(&mut self, world: &mut SimWorld, row: usize, lambda: f64) {
        for s in &self.rows[row].sides {
            match s {
                Side::Body { idx, dir, ang } => {
                    let (im, ii) = self.body_inv[*idx];
                    let b = &mut world.bodies[*idx];
                    b.linear_velocity += *dir * (lambda * im);
                    b.angular_velocity += ang * lambda * ii;
                }
                Side::Hand { idx, minv_jac, .. } => {
                    for (v, m) in self.hands[*idx].velocity.iter_mut().zip(minv_jac) {
                        *v += lambda * m;
                    }
                }
            }
        }
    }

    fn solve_velocities(&mut self, world: &mut SimWorld) {
        for _ in 0..self.iterations {
            for r in 0..self.rows.len() {
                let vel = self.row_velocity(world, &self.rows[r]);
                let row = &self.rows[r];
                let old = row.impulse;
                let new = match row.kind {
                    RowKind::Normal { target, .. } => (old + row.eff_mass * (target - vel)).max(0.0),
                    RowKind::Tangent { normal_row, mu, .. } => {
                        let limit = mu * self.rows[normal_row].impulse;
                        (old - row.eff_mass * vel).clamp(-limit, limit)
                    }
                    RowKind::Limit => (old - row.eff_mass * vel).max(0.0),
                };
                self.rows[r].impulse = new;
                self.apply(world, r, new - old);
            }
        }
        // Friction limits use the final normal impulse; re-clamp accumulated
        // tangent impulses that the last normal update left outside the cone.
        for r in 0..self.rows.len() {
            if let RowKind::Tangent { normal_row, mu, .. } = self.rows[r].kind {
                let limit = mu * self.rows[normal_row].impulse;
                let old = self.rows[r].impulse;
                let new = old.clamp(-limit, limit);
                if new != old {
                    self.rows[r].impulse = new;
                    self.apply(world, r, new - old);
                }
            }
        }
    }

    fn solve_positions(&mut self) {
        let normals: Vec<usize> = (0..self.rows.len())
            .filter(|&r| matches!(self.rows[r].kind, RowKind::Normal { bias, .. } if bias > 0.0))
            .collect();
        if normals.is_empty() {
            return;
        }
        for _ in 0..self.iterations {
            for &r in &normals {
                let vel = self.pseudo_velocity(r);
                let row = &self.rows[r];
                let RowKind::Normal { bias, .. } = row.kind else { unreachable!() };
                let old = row.pseudo_impulse;
                let new = (old + row.eff_mass * (bias - vel)).max(0.0);
                self.rows[r].pseudo_impulse = new;
                self.apply_pseudo(r, new - old);
            }
        }
    }

    fn pseudo_velocity(&self, r: usize) -> f64 {
        self.rows[r]
            .sides
            .iter()
            .map(|s| match s {
                Side::Body { idx, dir, ang } => {
                    let (v, w) = self.body_pseudo[*idx];
                    v.dot(*dir) + w * ang
                }
                Side::Hand { idx, jac, .. } => dot(jac, &self.hands[*idx].pseudo),
            })
            .sum()
    }

    fn apply_pseudo(&mut self, r: usize, lambda: f64) {
        let sides = std::mem::take(&mut self.rows[r].sides);
        for s in &sides {
            match s {
                Side::Body { idx, dir, ang } => {
                    let p = &mut self.body_pseudo[*idx];
                    let (im, ii) = self.body_inv[*idx];
                    p.0 += *dir * (lambda * im);
                    p.1 += ang * lambda * ii;
                }
                Side::Hand { idx, minv_jac, .. } => {
                    for (v, m) in self.hands[*idx].pseudo.iter_mut().zip(minv_jac) {
                        *v += lambda * m;
                    }
                }
            }
        }
        self.rows[r].sides = sides;
    }

    fn finish(mut self, world: &mut SimWorld) {
        let dt = self.dt;
        for (b, (pv, pw)) in world.bodies.iter_mut().zip(&self.body_pseudo) {
            if !b.is_dynamic() {
                continue;
            }
            let pos = b.pose.pos + (b.linear_velocity + *pv) * dt;
            let angle = b.pose.angle + (b.angular_velocity + pw) * dt;
            b.pose = Pose2::from_parts(pos, angle);
        }
        for (h, hs) in world.hands.iter_mut().zip(&self.hands) {
            let v = &hs.velocity;
            let p = &hs.pseudo;
            let st = &mut h.state;
            st.set_generalized_velocity(v);
            if !h.model.fixed_root {
                let root = st.root_pose;
                st.root_pose = Pose2::from_parts(
                    root.pos + Vec2::new(v[0] + p[0], v[1] + p[1]) * dt,
                    wrap_angle(root.angle + (v[2] + p[2]) * dt),
                );
            } else {
                st.root_velocity = [0.0; 3];
            }
            for k in 0..st.q.len() {
                st.q[k] += (v[3 + k] + p[3 + k]) * dt;
            }
            for (k, lim) in h.model.joint_limits().iter().enumerate() {
                if st.q[k] < lim[0] {
                    st.q[k] = lim[0];
                    st.qdot[k] = st.qdot[k].max(0.0);
                } else if st.q[k] > lim[1] {
                    st.q[k] = lim[1];
                    st.qdot[k] = st.qdot[k].min(0.0);
                }
            }
        }

        // Store solved impulses on the contacts and feed the sensors.
        for row in &self.rows {
            match row.kind {
                RowKind::Normal { contact, .. } => self.contacts[contact].normal_impulse = row.impulse,
                RowKind::Tangent { contact, .. } => self.contacts[contact].tangent_impulse = row.impulse,
                RowKind::Limit => {}
            }
        }
        for c in &self.contacts {
            if let (BodyRef::Body(b), BodyRef::Link { hand, link }) = (c.body_a, c.body_b) {
                if world.bodies[b].is_dynamic() {
                    *world.sensor_impulses.entry((hand, link, b, c.part_a)).or_insert(Vec2::ZERO) +=
                        c.impulse();
                }
            }
        }
        let mut contacts = std::mem::take(&mut self.contacts);
        contacts.retain(|c| c.penetration >= 0.0);
        world.contacts = contacts;
        world.link_forces.clear();
        for b in &mut world.bodies {
            b.applied_force = Vec2::ZERO;
            b.applied_torque = 0.0;
        }
    }
}

fn speculative_contacts(
    body_a: BodyRef,
    parts_a: &[WorldShape],
    body_b: BodyRef,
    parts_b: &[WorldShape],
    margin: f64,
    out: &mut Vec<ContactPoint>,
) {
    let mut raw = Vec::with_capacity(2);
    for (ia, sa) in parts_a.iter().enumerate() {
        for (ib, sb) in parts_b.iter().enumerate() {
            raw.clear();
            collide(sa, sb, margin, &mut raw);
            out.extend(raw.iter().map(|c| ContactPoint {
                position: c.position,
                normal: c.normal,
                penetration: c.penetration,
                body_a,
                body_b,
                part_a: ia,
                part_b: ib,
                normal_impulse: 0.0,
                tangent_impulse: 0.0,
            }));
        }
    }
}

fn friction_scale(world: &SimWorld, r: BodyRef) -> f64 {
    match r {
        BodyRef::Body(i) => world.bodies[i].friction_scale,
        BodyRef::Link { .. } => 1.0,
    }
}
