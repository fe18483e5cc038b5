//! Narrow phase for rounded convex cores (disks, capsules, polygons).
//!
//! Separated cores use exact closest features; overlapping cores fall back to
//! SAT with reference-face clipping. Nearly parallel edges produce a two-point
//! manifold so flat resting contact does not rock.

use super::math::Vec2;
use super::shape::WorldShape;

/// Identifies one side of a contact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BodyRef {
    /// Free rigid body by index in the world.
    Body(usize),
    /// Link of an articulated hand; link 0 is the palm.
    Link { hand: usize, link: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContactPoint {
    pub position: Vec2,
    /// Unit normal pointing from `body_a` into `body_b`.
    pub normal: Vec2,
    pub penetration: f64,
    pub body_a: BodyRef,
    pub body_b: BodyRef,
    pub part_a: usize,
    pub part_b: usize,
    pub normal_impulse: f64,
    pub tangent_impulse: f64,
}

impl ContactPoint {
    /// Tangent direction used for the friction impulse.
    pub fn tangent(&self) -> Vec2 {
        self.normal.perp()
    }

    /// Total impulse applied to `body_b`.
    pub fn impulse(&self) -> Vec2 {
        self.normal * self.normal_impulse + self.tangent() * self.tangent_impulse
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct RawContact {
    pub position: Vec2,
    pub normal: Vec2,
    pub penetration: f64,
}

const PARALLEL_TOL: f64 = 0.02;
const TIE_TOL: f64 = 1e-9;

/// All contacts between two lists of world-space parts. Normals point from the
/// `a` side into the `b` side; separated pairs yield nothing.
pub fn detect_contacts(
    body_a: BodyRef,
    parts_a: &[WorldShape],
    body_b: BodyRef,
    parts_b: &[WorldShape],
) -> Vec<ContactPoint> {
    let mut out = Vec::new();
    let mut raw = Vec::with_capacity(2);
    for (ia, sa) in parts_a.iter().enumerate() {
        for (ib, sb) in parts_b.iter().enumerate() {
            raw.clear();
            collide(sa, sb, 0.0, &mut raw);
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
    out
}

/// True when the two rounded shapes touch or overlap.
pub fn shapes_intersect(a: &WorldShape, b: &WorldShape) -> bool {
    if !a.aabb_overlaps(b, 0.0) {
        return false;
    }
    let c = core_closest(a, b);
    c.overlap || c.dist <= a.radius + b.radius
}

/// Contacts between two shapes. `margin > 0` also reports speculative
/// contacts separated by up to `margin` (negative penetration).
pub(crate) fn collide(a: &WorldShape, b: &WorldShape, margin: f64, out: &mut Vec<RawContact>) {
    if !a.aabb_overlaps(b, margin) {
        return;
    }
    let closest = core_closest(a, b);
    let total_r = a.radius + b.radius;
    if !closest.overlap {
        if closest.dist > total_r + margin {
            return;
        }
        separated_manifold(a, b, &closest, margin, out);
    } else {
        sat_manifold(a, b, margin, out);
    }
}

fn edge_count(n: usize) -> usize {
    match n {
        1 => 1,
        2 => 1,
        n => n,
    }
}

fn edge(verts: &[Vec2], i: usize) -> (Vec2, Vec2) {
    let n = verts.len();
    (verts[i], verts[(i + 1) % n])
}

struct Closest {
    dist: f64,
    pa: Vec2,
    pb: Vec2,
    edge_a: usize,
    edge_b: usize,
    overlap: bool,
}

fn core_closest(a: &WorldShape, b: &WorldShape) -> Closest {
    let mut best = Closest {
        dist: f64::INFINITY,
        pa: Vec2::ZERO,
        pb: Vec2::ZERO,
        edge_a: 0,
        edge_b: 0,
        overlap: false,
    };
    for i in 0..edge_count(a.verts.len()) {
        let (a1, a2) = edge(&a.verts, i);
        for j in 0..edge_count(b.verts.len()) {
            let (b1, b2) = edge(&b.verts, j);
            let (pa, pb) = closest_segments(a1, a2, b1, b2);
            let d = (pb - pa).length();
            if d < best.dist - TIE_TOL {
                best = Closest {
                    dist: d,
                    pa,
                    pb,
                    edge_a: i,
                    edge_b: j,
                    overlap: false,
                };
            }
        }
    }
    // On ties prefer a parallel edge pair so flat contact gets two points.
    if a.verts.len() >= 2 && b.verts.len() >= 2 {
        'outer: for i in 0..edge_count(a.verts.len()) {
            let (a1, a2) = edge(&a.verts, i);
            for j in 0..edge_count(b.verts.len()) {
                let (b1, b2) = edge(&b.verts, j);
                if !nearly_parallel(a2 - a1, b2 - b1) {
                    continue;
                }
                let (pa, pb) = closest_segments(a1, a2, b1, b2);
                let d = (pb - pa).length();
                if d <= best.dist + TIE_TOL {
                    best.edge_a = i;
                    best.edge_b = j;
                    break 'outer;
                }
            }
        }
    }
    best.overlap = best.dist < 1e-12
        || (a.verts.len() >= 3 && b.verts.iter().any(|p| point_in_convex(&a.verts, *p)))
        || (b.verts.len() >= 3 && a.verts.iter().any(|p| point_in_convex(&b.verts, *p)));
    best
}

fn nearly_parallel(da: Vec2, db: Vec2) -> bool {
    let la = da.length();
    let lb = db.length();
    if la < 1e-12 || lb < 1e-12 {
        return false;
    }
    (da.cross(db) / (la * lb)).abs() < PARALLEL_TOL
}

fn point_in_convex(verts: &[Vec2], p: Vec2) -> bool {
    let n = verts.len();
    (0..n).all(|i| {
        let (v1, v2) = edge(verts, i);
        (v2 - v1).cross(p - v1) > 0.0
    })
}

/// Closest points between segments `p1q1` and `p2q2`.
pub fn closest_segments(p1: Vec2, q1: Vec2, p2: Vec2, q2: Vec2) -> (Vec2, Vec2) {
    const EPS: f64 = 1e-24;
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(d1);
    let e = d2.dot(d2);
    let f = d2.dot(r);
    let (s, t);
    if a <= EPS && e <= EPS {
        return (p1, p2);
    }
    if a <= EPS {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(r);
        if e <= EPS {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 1e-18 * a * e {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    (p1 + d1 * s, p2 + d2 * t)
}

fn separated_manifold(a: &WorldShape, b: &WorldShape, c: &Closest, margin: f64, out: &mut Vec<RawContact>) {
    let total_r = a.radius + b.radius;
    let normal = if c.dist > 1e-15 {
        (c.pb - c.pa) / c.dist
    } else {
        Vec2::new(0.0, 1.0)
    };
    if a.verts.len() >= 2 && b.verts.len() >= 2 {
        let (a1, a2) = edge(&a.verts, c.edge_a);
        let (b1, b2) = edge(&b.verts, c.edge_b);
        if nearly_parallel(a2 - a1, b2 - b1) {
            let len_a = (a2 - a1).length();
            let t = (a2 - a1) / len_a;
            let mut n = t.perp();
            if n.dot(normal) < 0.0 {
                n = -n;
            }
            let s1 = (b1 - a1).dot(t);
            let s2 = (b2 - a1).dot(t);
            let lo = s1.min(s2).max(0.0);
            let hi = s1.max(s2).min(len_a);
            if hi - lo > 1e-9 && (s2 - s1).abs() > 1e-15 {
                let start = out.len();
                for s in [lo, hi] {
                    let pa = a1 + t * s;
                    let u = (s - s1) / (s2 - s1);
                    let pb = b1 + (b2 - b1) * u;
                    let sep = (pb - pa).dot(n);
                    let pen = total_r - sep;
                    if pen >= -margin {
                        let sa = pa + n * a.radius;
                        let sb = pb - n * b.radius;
                        out.push(RawContact {
                            position: (sa + sb) * 0.5,
                            normal: n,
                            penetration: pen,
                        });
                    }
                }
                if out.len() - start == 2 {
                    return;
                }
                out.truncate(start);
            }
        }
    }
    let sa = c.pa + normal * a.radius;
    let sb = c.pb - normal * b.radius;
    out.push(RawContact {
        position: (sa + sb) * 0.5,
        normal,
        penetration: total_r - c.dist,
    });
}

/// Outward normals of a core's faces. Segments have two opposite faces.
fn face(verts: &[Vec2], i: usize) -> (Vec2, Vec2, Vec2) {
    if verts.len() == 2 {
        let (v1, v2) = if i == 0 {
            (verts[0], verts[1])
        } else {
            (verts[1], verts[0])
        };
        let e = v2 - v1;
        let n = Vec2::new(e.y, -e.x).normalize_or(Vec2::new(0.0, 1.0));
        return (v1, v2, n);
    }
    let (v1, v2) = edge(verts, i);
    let e = v2 - v1;
    (v1, v2, Vec2::new(e.y, -e.x).normalize_or(Vec2::new(0.0, 1.0)))
}

fn face_count(n: usize) -> usize {
    match n {
        1 => 0,
        2 => 2,
        n => n,
    }
}

fn max_separation(reference: &[Vec2], incident: &[Vec2]) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, 0);
    for i in 0..face_count(reference.len()) {
        let (v1, _, n) = face(reference, i);
        let sep = incident
            .iter()
            .map(|p| n.dot(*p - v1))
            .fold(f64::INFINITY, f64::min);
        if sep > best.0 {
            best = (sep, i);
        }
    }
    best
}

fn sat_manifold(a: &WorldShape, b: &WorldShape, margin: f64, out: &mut Vec<RawContact>) {
    let (sep_a, face_a) = max_separation(&a.verts, &b.verts);
    let (sep_b, face_b) = max_separation(&b.verts, &a.verts);
    let flip = face_count(a.verts.len()) == 0 || (face_count(b.verts.len()) > 0 && sep_b > sep_a + 1e-12);
    let (reference, incident, face_idx) = if flip { (b, a, face_b) } else { (a, b, face_a) };
    let (r1, r2, n) = face(&reference.verts, face_idx);

    // Incident feature: the face most anti-parallel to n, or the point itself.
    let inc_pts: [Vec2; 2];
    let inc_len;
    match incident.verts.len() {
        1 => {
            inc_pts = [incident.verts[0]; 2];
            inc_len = 1;
        }
        m => {
            let mut best = (f64::INFINITY, 0);
            for i in 0..face_count(m) {
                let (_, _, ni) = face(&incident.verts, i);
                let d = ni.dot(n);
                if d < best.0 {
                    best = (d, i);
                }
            }
            let (i1, i2, _) = face(&incident.verts, best.1);
            inc_pts = [i1, i2];
            inc_len = 2;
        }
    }

    let t = (r2 - r1).normalize_or(n.perp());
    let lo = 0.0;
    let hi = (r2 - r1).dot(t);
    let mut pts: Vec<Vec2> = inc_pts[..inc_len].to_vec();
    if inc_len == 2 {
        pts = clip_segment(pts[0], pts[1], r1, t, lo, hi);
    }
    let total_r = reference.radius + incident.radius;
    let normal = if flip { -n } else { n };
    let start = out.len();
    for p in &pts {
        let sep = n.dot(*p - r1);
        let pen = total_r - sep;
        if pen >= -margin {
            let on_ref = *p - n * sep + n * reference.radius;
            let on_inc = *p - n * incident.radius;
            out.push(RawContact {
                position: (on_ref + on_inc) * 0.5,
                normal,
                penetration: pen,
            });
        }
    }
    if out.len() == start {
        // Degenerate clip; fall back to the deepest incident vertex.
        let p = incident
            .verts
            .iter()
            .copied()
            .min_by(|x, y| n.dot(*x - r1).total_cmp(&n.dot(*y - r1)))
            .unwrap_or(r1);
        let sep = n.dot(p - r1);
        out.push(RawContact {
            position: p - n * (sep * 0.5),
            normal,
            penetration: (total_r - sep).max(0.0),
        });
    }
}

fn clip_segment(p1: Vec2, p2: Vec2, origin: Vec2, t: Vec2, lo: f64, hi: f64) -> Vec<Vec2> {
    let s1 = (p1 - origin).dot(t);
    let s2 = (p2 - origin).dot(t);
    if (s1 < lo && s2 < lo) || (s1 > hi && s2 > hi) {
        // Entirely outside the reference face's slab; keep the nearer end.
        let nearer = if (s1 - s2).abs() < 1e-15 {
            p1
        } else if s1 < lo {
            if s1 > s2 {
                p1
            } else {
                p2
            }
        } else if s1 < s2 {
            p1
        } else {
            p2
        };
        return vec![nearer];
    }
    let clamp_to = |s: f64| -> Vec2 {
        if (s2 - s1).abs() < 1e-15 {
            return p1;
        }
        let u = (s - s1) / (s2 - s1);
        p1 + (p2 - p1) * u
    };
    let mut q1 = p1;
    let mut q2 = p2;
    if s1 < lo {
        q1 = clamp_to(lo);
    } else if s1 > hi {
        q1 = clamp_to(hi);
    }
    if s2 < lo {
        q2 = clamp_to(lo);
    } else if s2 > hi {
        q2 = clamp_to(hi);
    }
    if (q2 - q1).length_squared() < 1e-24 {
        vec![q1]
    } else {
        vec![q1, q2]
    }
}
