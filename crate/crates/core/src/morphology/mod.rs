//! Object shapes, source-to-target morphing and convex decomposition.

mod decompose;
mod family;
mod project;

pub use decompose::{convex_decompose, mass_properties, polygon_moments, ConvexDecomposition, MassProperties};
pub use family::{MorphFamily, DEFAULT_TS};
pub use project::{closest_point_on_segment, morph, project_to_surface};

use std::fmt::Write as _;
use std::path::Path;

use crate::physics::shape::signed_area;
use crate::physics::Vec2;

#[derive(Debug, thiserror::Error)]
pub enum MorphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid mesh {name}: {msg}")]
    InvalidMesh { name: String, msg: String },
    #[error("morph at t = {t} self-intersects")]
    Degenerate { t: f64 },
    #[error("t = {0} outside [0, 1]")]
    BadFraction(f64),
    #[error("density must be positive, got {0}")]
    BadDensity(f64),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Simple closed polygon, counter-clockwise.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh2 {
    pub name: String,
    vertices: Vec<Vec2>,
}

const GEOM_EPS: f64 = 1e-12;

impl Mesh2 {
    /// Validates the loop; clockwise input is reversed to counter-clockwise.
    pub fn new(name: impl Into<String>, mut vertices: Vec<Vec2>) -> Result<Self, MorphError> {
        let name = name.into();
        let invalid = |msg: String| MorphError::InvalidMesh { name: name.clone(), msg };
        if vertices.len() < 3 {
            return Err(invalid(format!("{} vertices", vertices.len())));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(invalid("non-finite vertex".into()));
        }
        if let Some(i) = self_intersection(&vertices) {
            return Err(invalid(format!("self-intersecting at edge {i}")));
        }
        let area = signed_area(&vertices);
        if area.abs() < GEOM_EPS {
            return Err(invalid(format!("area {area:e}")));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        Ok(Self { name, vertices })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn edge(&self, i: usize) -> (Vec2, Vec2) {
        (self.vertices[i], self.vertices[(i + 1) % self.vertices.len()])
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            (b - a).cross(c - b) >= -1e-9
        })
    }

    /// Axis-aligned square of side `side` centred at the origin.
    pub fn square(name: &str, side: f64) -> Self {
        let h = 0.5 * side;
        Self::new(name, vec![Vec2::new(-h, -h), Vec2::new(h, -h), Vec2::new(h, h), Vec2::new(-h, h)])
            .expect("square is valid")
    }

    /// `points`-pointed star with the first tip on the +x axis.
    pub fn star(name: &str, points: usize, outer: f64, inner: f64) -> Result<Self, MorphError> {
        let n = 2 * points;
        let verts = (0..n)
            .map(|i| {
                let r = if i % 2 == 0 { outer } else { inner };
                Vec2::from_angle(std::f64::consts::PI * i as f64 / points as f64) * r
            })
            .collect();
        Self::new(name, verts)
    }

    /// Parses `v x y` lines; `#` starts a comment, `name <id>` sets the name.
    pub fn parse(default_name: &str, text: &str) -> Result<Self, MorphError> {
        let mut name = default_name.to_string();
        let mut verts = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| MorphError::Parse { line: i + 1, msg: msg.to_string() };
            let mut tok = line.split_whitespace();
            match tok.next() {
                Some("v") => {
                    let x: f64 = tok.next().ok_or_else(|| err("missing x"))?.parse().map_err(|_| err("bad x"))?;
                    let y: f64 = tok.next().ok_or_else(|| err("missing y"))?.parse().map_err(|_| err("bad y"))?;
                    if tok.next().is_some() {
                        return Err(err("trailing tokens"));
                    }
                    verts.push(Vec2::new(x, y));
                }
                Some("name") => {
                    name = tok.collect::<Vec<_>>().join(" ");
                }
                Some(other) => return Err(err(&format!("unknown record `{other}`"))),
                None => {}
            }
        }
        Self::new(name, verts)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("name {}\n", self.name);
        for v in &self.vertices {
            let _ = writeln!(s, "v {:.16e} {:.16e}", v.x, v.y);
        }
        s
    }

    pub fn load(path: &Path) -> Result<Self, MorphError> {
        let text = std::fs::read_to_string(path).map_err(|source| MorphError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("mesh");
        Self::parse(stem, &text)
    }

    pub fn save(&self, path: &Path) -> Result<(), MorphError> {
        std::fs::write(path, self.to_text()).map_err(|source| MorphError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2) -> bool {
    p.x >= a.x.min(b.x) - GEOM_EPS
        && p.x <= a.x.max(b.x) + GEOM_EPS
        && p.y >= a.y.min(b.y) - GEOM_EPS
        && p.y <= a.y.max(b.y) + GEOM_EPS
}

/// Closed-segment intersection test, touching included.
pub(crate) fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let scale = (b - a).length().max((d - c).length()).max(1.0);
    let eps = GEOM_EPS * scale * scale;
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps)) {
        return true;
    }
    (d1.abs() <= eps && on_segment(c, d, a))
        || (d2.abs() <= eps && on_segment(c, d, b))
        || (d3.abs() <= eps && on_segment(a, b, c))
        || (d4.abs() <= eps && on_segment(a, b, d))
}

/// First edge index taking part in a self-intersection, if any. Adjacent
/// edges may share their common vertex but must not fold back onto each other.
pub(crate) fn self_intersection(v: &[Vec2]) -> Option<usize> {
    let n = v.len();
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        if (b - a).length_squared() <= GEOM_EPS * GEOM_EPS {
            return Some(i);
        }
        let c = v[(i + 2) % n];
        if orient(a, b, c).abs() <= GEOM_EPS && (b - a).dot(c - b) < 0.0 {
            return Some(i);
        }
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_intersect(a, b, v[j], v[(j + 1) % n]) {
                return Some(i);
            }
        }
    }
    None
}
