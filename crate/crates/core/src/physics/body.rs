use super::math::{Pose2, Vec2};
use super::shape::Shape;
use super::PhysicsError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BodyKind {
    Dynamic,
    /// Infinite mass; pose only changes when set from outside.
    Kinematic,
}

/// Free planar rigid body. `pose` is the pose of the center of mass frame;
/// collision parts are given in that frame.
#[derive(Clone, Debug)]
pub struct RigidBody {
    pub name: String,
    pub kind: BodyKind,
    pub mass: f64,
    pub inertia: f64,
    pub pose: Pose2,
    pub linear_velocity: Vec2,
    pub angular_velocity: f64,
    pub parts: Vec<Shape>,
    /// Friction multiplier applied on top of the world coefficient.
    pub friction_scale: f64,
    /// External force and torque applied for the next step.
    pub applied_force: Vec2,
    pub applied_torque: f64,
}

impl RigidBody {
    pub fn dynamic(
        name: impl Into<String>,
        mass: f64,
        inertia: f64,
        pose: Pose2,
        parts: Vec<Shape>,
    ) -> Result<Self, PhysicsError> {
        if !(mass > 0.0 && mass.is_finite()) || !(inertia > 0.0 && inertia.is_finite()) {
            return Err(PhysicsError::InvalidMass { mass, inertia });
        }
        Ok(Self {
            name: name.into(),
            kind: BodyKind::Dynamic,
            mass,
            inertia,
            pose,
            linear_velocity: Vec2::ZERO,
            angular_velocity: 0.0,
            parts,
            friction_scale: 1.0,
            applied_force: Vec2::ZERO,
            applied_torque: 0.0,
        })
    }

    pub fn kinematic(name: impl Into<String>, pose: Pose2, parts: Vec<Shape>) -> Self {
        Self {
            name: name.into(),
            kind: BodyKind::Kinematic,
            mass: f64::INFINITY,
            inertia: f64::INFINITY,
            pose,
            linear_velocity: Vec2::ZERO,
            angular_velocity: 0.0,
            parts,
            friction_scale: 1.0,
            applied_force: Vec2::ZERO,
            applied_torque: 0.0,
        }
    }

    pub fn is_dynamic(&self) -> bool {
        self.kind == BodyKind::Dynamic
    }

    pub fn inv_mass(&self) -> f64 {
        if self.is_dynamic() {
            1.0 / self.mass
        } else {
            0.0
        }
    }

    pub fn inv_inertia(&self) -> f64 {
        if self.is_dynamic() {
            1.0 / self.inertia
        } else {
            0.0
        }
    }

    pub fn velocity_at(&self, p: Vec2) -> Vec2 {
        self.linear_velocity + (p - self.pose.pos).perp() * self.angular_velocity
    }

    pub fn kinetic_energy(&self) -> f64 {
        if !self.is_dynamic() {
            return 0.0;
        }
        0.5 * self.mass * self.linear_velocity.length_squared()
            + 0.5 * self.inertia * self.angular_velocity * self.angular_velocity
    }

    pub fn momentum(&self) -> Vec2 {
        if self.is_dynamic() {
            self.linear_velocity * self.mass
        } else {
            Vec2::ZERO
        }
    }

    pub fn is_finite(&self) -> bool {
        self.pose.is_finite() && self.linear_velocity.is_finite() && self.angular_velocity.is_finite()
    }
}
