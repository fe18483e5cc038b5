//! Planar articulated rigid-body simulation with stiff frictional contact,
//! stable-PD actuation and per-link contact sensing.

pub mod body;
pub mod collide;
pub mod dense;
pub mod hand;
pub mod math;
pub mod pd;
pub mod scene;
pub mod shape;
pub mod world;

pub use body::{BodyKind, RigidBody};
pub use collide::{detect_contacts, BodyRef, ContactPoint};
pub use hand::{FingerChain, HandModel, JointState, LinkSpec, PdGains};
pub use math::{angle_diff, wrap_angle, Pose2, Vec2};
pub use pd::{explicit_pd, hand_stable_pd, stable_pd, PdTargets};
pub use shape::{Capsule, ConvexPolygon, Shape};
pub use scene::{SceneError, SceneSpec};
pub use world::{ContactParams, ContactVector, LinkForce, SimWorld};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum PhysicsError {
    #[error("simulation diverged at t = {time:.4} s")]
    Diverged { time: f64 },
    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),
    #[error("polygon is not convex")]
    NonConvexPolygon,
    #[error("invalid mass {mass} / inertia {inertia}")]
    InvalidMass { mass: f64, inertia: f64 },
    #[error("invalid hand: {0}")]
    InvalidHand(String),
    #[error("invalid contact parameters: {0}")]
    InvalidContactParams(String),
    #[error("expected {expected} actuation values, got {got}")]
    ActuationLength { expected: usize, got: usize },
}
