//! Scene description files.
//!
//! A scene is a small sectioned `key = value` file (TOML syntax) listing the
//! world settings, the hands and any static or dynamic bodies:
//!
//! ```toml
//! gravity = [0.0, -9.81]
//! self_collision = false
//!
//! [contact]
//! friction = 1.5
//!
//! [[hand]]
//! name = "right"
//! root = [0.0, 0.0, 0.0]
//! finger = [
//!   { base = [-0.045, 0.0], base_angle = 1.5707963267948966, links = [ { length = 0.045 } ] },
//! ]
//!
//! [[body]]
//! name = "ground"
//! kinematic = true
//! pose = [0.0, -0.5, 0.0]
//! parts = [ { polygon = [[-5.0, -0.5], [5.0, -0.5], [5.0, 0.5], [-5.0, 0.5]] } ]
//! ```
//!
//! Omitted hand fields fall back to [`HandModel::planar_default`].

use serde::{Deserialize, Serialize};

use super::body::RigidBody;
use super::hand::{FingerChain, HandModel, LinkSpec, PdGains};
use super::math::{Pose2, Vec2};
use super::shape::{Capsule, ConvexPolygon, Shape};
use super::world::{ContactParams, SimWorld};
use super::PhysicsError;

#[derive(Debug, thiserror::Error)]
pub enum SceneError {
    #[error("scene parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    #[serde(default = "default_gravity")]
    pub gravity: [f64; 2],
    #[serde(default = "default_rate")]
    pub substep_rate: f64,
    #[serde(default)]
    pub self_collision: bool,
    #[serde(default)]
    pub contact: ContactSpec,
    #[serde(default)]
    pub hand: Vec<HandSpec>,
    #[serde(default)]
    pub body: Vec<BodySpec>,
}

fn default_gravity() -> [f64; 2] {
    [0.0, -9.81]
}

fn default_rate() -> f64 {
    600.0
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactSpec {
    pub friction: Option<f64>,
    /// Defaults to `0.2 · substep_rate`.
    pub baumgarte_beta: Option<f64>,
    pub penetration_slop: Option<f64>,
    pub solver_iterations: Option<usize>,
    pub restitution: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainSpec {
    pub kp: f64,
    /// Defaults to critical damping `2·sqrt(kp)`.
    pub kd: Option<f64>,
}

impl GainSpec {
    fn gains(&self) -> PdGains {
        PdGains {
            kp: self.kp,
            kd: self.kd.unwrap_or(2.0 * self.kp.sqrt()),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpecFile {
    pub length: f64,
    pub radius: Option<f64>,
    pub mass: Option<f64>,
    pub limits: Option<[f64; 2]>,
    pub gains: Option<GainSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FingerSpec {
    pub base: [f64; 2],
    pub base_angle: f64,
    pub links: Vec<LinkSpecFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandSpec {
    pub name: Option<String>,
    #[serde(default)]
    pub root: [f64; 3],
    pub fixed_root: Option<bool>,
    pub palm: Option<CapsuleSpec>,
    pub palm_mass: Option<f64>,
    /// Gains shared by every finger joint unless a link overrides them.
    pub joint_gains: Option<GainSpec>,
    pub root_gains: Option<[GainSpec; 3]>,
    pub finger: Option<Vec<FingerSpec>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapsuleSpec {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub radius: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PartSpec {
    Capsule { capsule: CapsuleSpec },
    Polygon { polygon: Vec<[f64; 2]> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySpec {
    pub name: String,
    #[serde(default)]
    pub kinematic: bool,
    pub mass: Option<f64>,
    pub inertia: Option<f64>,
    #[serde(default)]
    pub pose: [f64; 3],
    pub parts: Vec<PartSpec>,
}

fn v(p: [f64; 2]) -> Vec2 {
    Vec2::new(p[0], p[1])
}

impl CapsuleSpec {
    fn capsule(&self) -> Capsule {
        Capsule::new(v(self.a), v(self.b), self.radius)
    }
}

impl PartSpec {
    fn shape(&self) -> Result<Shape, PhysicsError> {
        Ok(match self {
            PartSpec::Capsule { capsule } => Shape::Capsule(capsule.capsule()),
            PartSpec::Polygon { polygon } => {
                Shape::Polygon(ConvexPolygon::new(polygon.iter().copied().map(v).collect())?)
            }
        })
    }
}

impl HandSpec {
    pub fn model(&self) -> HandModel {
        let mut hand = HandModel::planar_default();
        if let Some(name) = &self.name {
            hand.name = name.clone();
        }
        if let Some(p) = &self.palm {
            hand.palm = p.capsule();
        }
        if let Some(m) = self.palm_mass {
            hand.palm_mass = m;
        }
        if let Some(f) = self.fixed_root {
            hand.fixed_root = f;
        }
        if let Some(g) = &self.root_gains {
            hand.root_gains = [g[0].gains(), g[1].gains(), g[2].gains()];
        }
        let template = hand.fingers[0].links[0].clone();
        if let Some(fingers) = &self.finger {
            hand.fingers = fingers
                .iter()
                .map(|f| FingerChain {
                    base: v(f.base),
                    base_angle: f.base_angle,
                    links: f
                        .links
                        .iter()
                        .map(|l| LinkSpec {
                            length: l.length,
                            radius: l.radius.unwrap_or(template.radius),
                            mass: l.mass.unwrap_or(template.mass),
                            limits: l.limits.unwrap_or(template.limits),
                            gains: l.gains.as_ref().map(GainSpec::gains).unwrap_or(template.gains),
                        })
                        .collect(),
                })
                .collect();
        }
        if let Some(g) = &self.joint_gains {
            let gains = g.gains();
            let overridden: Vec<Vec<bool>> = self
                .finger
                .as_ref()
                .map(|fs| fs.iter().map(|f| f.links.iter().map(|l| l.gains.is_some()).collect()).collect())
                .unwrap_or_default();
            for (fi, finger) in hand.fingers.iter_mut().enumerate() {
                for (li, link) in finger.links.iter_mut().enumerate() {
                    let own = overridden.get(fi).and_then(|f| f.get(li)).copied().unwrap_or(false);
                    if !own {
                        link.gains = gains;
                    }
                }
            }
        }
        hand
    }
}

impl SceneSpec {
    pub fn parse(text: &str) -> Result<Self, SceneError> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("scene serializes")
    }

    pub fn contact_params(&self) -> ContactParams {
        let d = ContactParams::stiff(self.substep_rate);
        let c = &self.contact;
        ContactParams {
            friction: c.friction.unwrap_or(d.friction),
            baumgarte_beta: c.baumgarte_beta.unwrap_or(d.baumgarte_beta),
            penetration_slop: c.penetration_slop.unwrap_or(d.penetration_slop),
            solver_iterations: c.solver_iterations.unwrap_or(d.solver_iterations),
            restitution: c.restitution.unwrap_or(d.restitution),
        }
    }

    pub fn build(&self) -> Result<SimWorld, SceneError> {
        if !(self.substep_rate > 0.0) {
            return Err(SceneError::Invalid(format!("substep_rate must be positive, got {}", self.substep_rate)));
        }
        let mut world = SimWorld::new(v(self.gravity));
        world.substep_rate = self.substep_rate;
        world.self_collision = self.self_collision;
        world.contact = self.contact_params();
        world.contact.validate()?;
        for h in &self.hand {
            world.add_hand(h.model(), Pose2::new(h.root[0], h.root[1], h.root[2]))?;
        }
        for b in &self.body {
            let parts = b.parts.iter().map(PartSpec::shape).collect::<Result<Vec<_>, _>>()?;
            let pose = Pose2::new(b.pose[0], b.pose[1], b.pose[2]);
            let body = if b.kinematic {
                RigidBody::kinematic(b.name.clone(), pose, parts)
            } else {
                let mass = b.mass.ok_or_else(|| SceneError::Invalid(format!("body {} needs a mass", b.name)))?;
                let inertia = b
                    .inertia
                    .ok_or_else(|| SceneError::Invalid(format!("body {} needs an inertia", b.name)))?;
                RigidBody::dynamic(b.name.clone(), mass, inertia, pose, parts)?
            };
            world.add_body(body);
        }
        Ok(world)
    }
}
