//! Collision shapes. Every shape is a convex core (point, segment or polygon)
//! swept by a radius, which lets one narrow phase handle all pairs.

use super::math::{Pose2, Vec2};
use super::PhysicsError;

/// A segment swept by a disk. A zero-length capsule is a disk.
#[derive(Clone, Debug, PartialEq)]
pub struct Capsule {
    pub a: Vec2,
    pub b: Vec2,
    pub radius: f64,
}

impl Capsule {
    pub fn new(a: Vec2, b: Vec2, radius: f64) -> Self {
        Self { a, b, radius }
    }

    pub fn disk(center: Vec2, radius: f64) -> Self {
        Self::new(center, center, radius)
    }

    pub fn area(&self) -> f64 {
        let len = (self.b - self.a).length();
        2.0 * self.radius * len + std::f64::consts::PI * self.radius * self.radius
    }

    /// Same capsule with the radius scaled by `factor`.
    pub fn inflated(&self, factor: f64) -> Capsule {
        Capsule::new(self.a, self.b, self.radius * factor)
    }
}

/// Counter-clockwise convex polygon with precomputed edge normals.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Vec2>,
}

pub const MIN_POLYGON_AREA: f64 = 1e-12;

impl ConvexPolygon {
    /// Validates convexity, orientation and area. Clockwise input is reversed.
    pub fn new(mut vertices: Vec<Vec2>) -> Result<Self, PhysicsError> {
        if vertices.len() < 3 {
            return Err(PhysicsError::DegeneratePolygon(format!(
                "{} vertices",
                vertices.len()
            )));
        }
        let area = signed_area(&vertices);
        if area.abs() < MIN_POLYGON_AREA {
            return Err(PhysicsError::DegeneratePolygon(format!("area {area:e}")));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            let e0 = vertices[(i + 1) % n] - vertices[i];
            let e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
            if e0.cross(e1) < -1e-9 {
                return Err(PhysicsError::NonConvexPolygon);
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }
}

/// Shoelace signed area, positive for counter-clockwise loops.
pub fn signed_area(vertices: &[Vec2]) -> f64 {
    let n = vertices.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += vertices[i].cross(vertices[(i + 1) % n]);
    }
    0.5 * acc
}

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Capsule(Capsule),
    Polygon(ConvexPolygon),
}

impl Shape {
    pub fn radius(&self) -> f64 {
        match self {
            Shape::Capsule(c) => c.radius,
            Shape::Polygon(_) => 0.0,
        }
    }

    /// Core vertices transformed to world space.
    pub fn world_core(&self, pose: &Pose2) -> WorldShape {
        match self {
            Shape::Capsule(c) => {
                let a = pose.transform_point(c.a);
                let b = pose.transform_point(c.b);
                let verts = if (c.b - c.a).length_squared() < 1e-24 {
                    vec![a]
                } else {
                    vec![a, b]
                };
                WorldShape::new(verts, c.radius)
            }
            Shape::Polygon(p) => WorldShape::new(
                p.vertices.iter().map(|v| pose.transform_point(*v)).collect(),
                0.0,
            ),
        }
    }
}

/// A shape resolved into world coordinates, with a cached bounding box.
#[derive(Clone, Debug)]
pub struct WorldShape {
    pub verts: Vec<Vec2>,
    pub radius: f64,
    pub min: Vec2,
    pub max: Vec2,
}

impl WorldShape {
    pub fn new(verts: Vec<Vec2>, radius: f64) -> Self {
        let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &verts {
            min.x = min.x.min(v.x);
            min.y = min.y.min(v.y);
            max.x = max.x.max(v.x);
            max.y = max.y.max(v.y);
        }
        let r = Vec2::new(radius, radius);
        Self {
            verts,
            radius,
            min: min - r,
            max: max + r,
        }
    }

    pub fn aabb_overlaps(&self, other: &WorldShape, margin: f64) -> bool {
        self.min.x <= other.max.x + margin
            && other.min.x <= self.max.x + margin
            && self.min.y <= other.max.y + margin
            && other.min.y <= self.max.y + margin
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clockwise_input_is_reoriented() {
        let p = ConvexPolygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
        ])
        .unwrap();
        assert!((p.area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_and_concave() {
        let flat = ConvexPolygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(2.0, 0.0),
        ]);
        assert!(matches!(flat, Err(PhysicsError::DegeneratePolygon(_))));
        let dart = ConvexPolygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(0.5, 0.5),
            Vec2::new(0.0, 2.0),
        ]);
        assert!(matches!(dart, Err(PhysicsError::NonConvexPolygon)));
    }
}
