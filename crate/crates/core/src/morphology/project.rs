use super::{self_intersection, Mesh2, MorphError};
use crate::physics::Vec2;

pub fn closest_point_on_segment(p: Vec2, a: Vec2, b: Vec2) -> Vec2 {
    let ab = b - a;
    let len2 = ab.length_squared();
    if len2 == 0.0 {
        return a;
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    if t == 0.0 {
        a
    } else if t == 1.0 {
        b
    } else {
        a + ab * t
    }
}

/// Closest point on the boundary of `source`; ties go to the lowest edge index.
pub fn project_to_surface(p: Vec2, source: &Mesh2) -> Vec2 {
    let mut best = source.vertices()[0];
    let mut best_d = f64::INFINITY;
    for i in 0..source.len() {
        let (a, b) = source.edge(i);
        let c = closest_point_on_segment(p, a, b);
        let d = (c - p).length_squared();
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

/// Moves every target vertex along the straight path from its projection on
/// `source` (t = 0) to itself (t = 1).
pub fn morph(source: &Mesh2, target: &Mesh2, t: f64) -> Result<Mesh2, MorphError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(MorphError::BadFraction(t));
    }
    let verts: Vec<Vec2> = target
        .vertices()
        .iter()
        .map(|&v| {
            let a = project_to_surface(v, source);
            a * (1.0 - t) + v * t
        })
        .collect();
    if self_intersection(&verts).is_some() {
        return Err(MorphError::Degenerate { t });
    }
    let name = format!("{}->{}({t})", source.name, target.name);
    Mesh2::new(name, verts).map_err(|_| MorphError::Degenerate { t })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Mesh2 {
        Mesh2::square("sq", 1.0)
    }

    #[test]
    fn analytic_projections() {
        let s = unit_square();
        assert_eq!(project_to_surface(Vec2::new(2.0, 0.0), &s), Vec2::new(0.5, 0.0));
        assert_eq!(project_to_surface(Vec2::new(0.7, 0.7), &s), Vec2::new(0.5, 0.5));
        let on = Vec2::new(0.5, 0.123);
        assert_eq!(project_to_surface(on, &s), on);
    }

    #[test]
    fn interior_ties_take_lowest_edge() {
        // centre is equidistant from all four edges; edge 0 is the bottom one
        assert_eq!(project_to_surface(Vec2::ZERO, &unit_square()), Vec2::new(0.0, -0.5));
    }

    #[test]
    fn endpoints_are_exact() {
        let s = unit_square();
        let g = Mesh2::star("star", 5, 0.5, 0.2).unwrap();
        let m1 = morph(&s, &g, 1.0).unwrap();
        assert_eq!(m1.vertices(), g.vertices());
        let m0 = morph(&s, &g, 0.0).unwrap();
        for v in m0.vertices() {
            assert!((project_to_surface(*v, &s) - *v).length() <= 1e-9);
        }
    }

    #[test]
    fn out_of_range_t() {
        let s = unit_square();
        assert!(matches!(morph(&s, &s, 1.5), Err(MorphError::BadFraction(_))));
    }
}
