//! Ear-clipping triangulation followed by Hertel–Mehlhorn merging.

use super::{Mesh2, MorphError};
use crate::physics::shape::signed_area;
use crate::physics::{ConvexPolygon, Shape, Vec2};

#[derive(Clone, Debug)]
pub struct ConvexDecomposition {
    /// Parts in the mesh frame.
    pub parts: Vec<ConvexPolygon>,
    /// kg/m²
    pub density: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MassProperties {
    pub mass: f64,
    pub com: Vec2,
    /// About the center of mass.
    pub inertia: f64,
}

impl ConvexDecomposition {
    pub fn area(&self) -> f64 {
        self.parts.iter().map(ConvexPolygon::area).sum()
    }

    /// Collision parts expressed relative to the center of mass.
    pub fn body_parts(&self) -> Vec<Shape> {
        let com = mass_properties(self).com;
        self.parts
            .iter()
            .map(|p| {
                let v = p.vertices().iter().map(|v| *v - com).collect();
                Shape::Polygon(ConvexPolygon::new(v).expect("shifted part stays convex"))
            })
            .collect()
    }
}

/// Area, centroid and second moment about the origin of a CCW polygon.
pub fn polygon_moments(v: &[Vec2]) -> (f64, Vec2, f64) {
    let n = v.len();
    let (mut a2, mut cx, mut cy, mut j) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let p = v[i];
        let q = v[(i + 1) % n];
        let c = p.cross(q);
        a2 += c;
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
        j += c * (p.x * p.x + p.x * q.x + q.x * q.x + p.y * p.y + p.y * q.y + q.y * q.y);
    }
    let area = 0.5 * a2;
    (area, Vec2::new(cx / (3.0 * a2), cy / (3.0 * a2)), j / 12.0)
}

pub fn mass_properties(decomp: &ConvexDecomposition) -> MassProperties {
    let rho = decomp.density;
    let (mut area, mut first, mut second) = (0.0, Vec2::ZERO, 0.0);
    for p in &decomp.parts {
        let (a, c, j) = polygon_moments(p.vertices());
        area += a;
        first += c * a;
        second += j;
    }
    let com = first * (1.0 / area);
    MassProperties {
        mass: rho * area,
        com,
        inertia: rho * (second - area * com.length_squared()),
    }
}

/// Splits a simple polygon into convex parts that exactly partition it.
pub fn convex_decompose(mesh: &Mesh2, density: f64) -> Result<ConvexDecomposition, MorphError> {
    if !(density > 0.0 && density.is_finite()) {
        return Err(MorphError::BadDensity(density));
    }
    let invalid = |msg: String| MorphError::InvalidMesh { name: mesh.name.clone(), msg };
    if mesh.is_convex() {
        let part = ConvexPolygon::new(mesh.vertices().to_vec()).map_err(|e| invalid(e.to_string()))?;
        return Ok(ConvexDecomposition { parts: vec![part], density });
    }
    let verts = drop_collinear(mesh.vertices());
    let tris = ear_clip(&verts).ok_or_else(|| invalid("triangulation failed".into()))?;
    let loops = hertel_mehlhorn(&verts, tris);
    let parts = loops
        .into_iter()
        .map(|l| ConvexPolygon::new(l.iter().map(|&i| verts[i]).collect()).map_err(|e| invalid(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ConvexDecomposition { parts, density })
}

fn scale(v: &[Vec2]) -> f64 {
    let (mut lo, mut hi) = (v[0], v[0]);
    for p in v {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    (hi - lo).length().max(1e-300)
}

/// Removes vertices lying on the segment between their neighbours; the
/// polygon's point set and area are unchanged.
fn drop_collinear(v: &[Vec2]) -> Vec<Vec2> {
    let eps = 1e-12 * scale(v).powi(2);
    let mut out: Vec<Vec2> = v.to_vec();
    loop {
        let n = out.len();
        let hit = (0..n).find(|&i| {
            let a = out[(i + n - 1) % n];
            let b = out[i];
            let c = out[(i + 1) % n];
            (b - a).cross(c - b).abs() <= eps && (b - a).dot(c - b) >= 0.0
        });
        match hit {
            Some(i) if n > 3 => {
                out.remove(i);
            }
            _ => return out,
        }
    }
}

fn point_in_triangle(p: Vec2, a: Vec2, b: Vec2, c: Vec2, eps: f64) -> bool {
    (b - a).cross(p - a) >= -eps && (c - b).cross(p - b) >= -eps && (a - c).cross(p - c) >= -eps
}

/// Triangulates a CCW simple polygon; returns CCW index triples.
fn ear_clip(v: &[Vec2]) -> Option<Vec<[usize; 3]>> {
    let eps = 1e-12 * scale(v).powi(2);
    let mut idx: Vec<usize> = (0..v.len()).collect();
    let mut tris = Vec::with_capacity(v.len() - 2);
    while idx.len() > 3 {
        let n = idx.len();
        let ear = (0..n).find(|&k| {
            let (ia, ib, ic) = (idx[(k + n - 1) % n], idx[k], idx[(k + 1) % n]);
            let (a, b, c) = (v[ia], v[ib], v[ic]);
            if (b - a).cross(c - b) <= eps {
                return false;
            }
            idx.iter().all(|&j| {
                j == ia || j == ib || j == ic || v[j] == a || v[j] == b || v[j] == c || !point_in_triangle(v[j], a, b, c, eps)
            })
        })?;
        tris.push([idx[(ear + n - 1) % n], idx[ear], idx[(ear + 1) % n]]);
        idx.remove(ear);
    }
    tris.push([idx[0], idx[1], idx[2]]);
    Some(tris)
}

fn is_convex_loop(v: &[Vec2], l: &[usize]) -> bool {
    let eps = 1e-12 * scale(v).powi(2);
    let n = l.len();
    (0..n).all(|i| {
        let a = v[l[i]];
        let b = v[l[(i + 1) % n]];
        let c = v[l[(i + 2) % n]];
        (b - a).cross(c - b) >= -eps
    })
}

/// Merges two loops across the shared diagonal `u → w` of `p` (`w → u` in `q`).
fn merge(p: &[usize], k: usize, q: &[usize], m: usize) -> Vec<usize> {
    let (np, nq) = (p.len(), q.len());
    let mut out = Vec::with_capacity(np + nq - 2);
    for s in 0..np {
        out.push(p[(k + 1 + s) % np]);
    }
    for s in 0..nq - 2 {
        out.push(q[(m + 2 + s) % nq]);
    }
    out
}

fn shared_edge(p: &[usize], q: &[usize]) -> Option<(usize, usize)> {
    let (np, nq) = (p.len(), q.len());
    for k in 0..np {
        let (u, w) = (p[k], p[(k + 1) % np]);
        for m in 0..nq {
            if q[m] == w && q[(m + 1) % nq] == u {
                return Some((k, m));
            }
        }
    }
    None
}

/// Greedily removes diagonals whose removal keeps the merged piece convex.
fn hertel_mehlhorn(v: &[Vec2], tris: Vec<[usize; 3]>) -> Vec<Vec<usize>> {
    let mut parts: Vec<Vec<usize>> = tris.into_iter().map(|t| t.to_vec()).collect();
    'outer: loop {
        for i in 0..parts.len() {
            for j in i + 1..parts.len() {
                if let Some((k, m)) = shared_edge(&parts[i], &parts[j]) {
                    let merged = merge(&parts[i], k, &parts[j], m);
                    if is_convex_loop(v, &merged) {
                        parts[i] = merged;
                        parts.remove(j);
                        continue 'outer;
                    }
                }
            }
        }
        break;
    }
    parts.retain(|l| signed_area(&l.iter().map(|&i| v[i]).collect::<Vec<_>>()) > 0.0);
    parts
}
