//! Planar vector and pose types.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// Wraps an angle into (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let two_pi = 2.0 * PI;
    let mut w = a.rem_euclid(two_pi);
    if w > PI {
        w -= two_pi;
    }
    // rem_euclid can land exactly on -π after subtraction for inputs like 3π
    if w <= -PI {
        w += two_pi;
    }
    w
}

/// Wrapped difference `to − from`, always in (−π, π].
pub fn angle_diff(to: f64, from: f64) -> f64 {
    wrap_angle(to - from)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(a: f64) -> Self {
        let (s, c) = a.sin_cos();
        Self::new(c, s)
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    /// Counter-clockwise perpendicular, `(−y, x)`.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn length_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn length(self) -> f64 {
        self.length_squared().sqrt()
    }

    pub fn normalize_or(self, fallback: Vec2) -> Vec2 {
        let l = self.length();
        if l > 1e-300 {
            self / l
        } else {
            fallback
        }
    }

    pub fn rotate(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn lerp(self, o: Vec2, t: f64) -> Vec2 {
        self * (1.0 - t) + o * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, o: Vec2) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Rigid planar transform. The angle is kept wrapped to (−π, π].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Pose2 {
    pub pos: Vec2,
    pub angle: f64,
}

impl Pose2 {
    pub const IDENTITY: Pose2 = Pose2 {
        pos: Vec2::ZERO,
        angle: 0.0,
    };

    pub fn new(x: f64, y: f64, angle: f64) -> Self {
        Self {
            pos: Vec2::new(x, y),
            angle: wrap_angle(angle),
        }
    }

    pub fn from_parts(pos: Vec2, angle: f64) -> Self {
        Self {
            pos,
            angle: wrap_angle(angle),
        }
    }

    /// Maps a point from this frame to the parent frame.
    pub fn transform_point(&self, p: Vec2) -> Vec2 {
        self.pos + p.rotate(self.angle)
    }

    pub fn transform_vector(&self, v: Vec2) -> Vec2 {
        v.rotate(self.angle)
    }

    pub fn inverse_transform_point(&self, p: Vec2) -> Vec2 {
        (p - self.pos).rotate(-self.angle)
    }

    /// `self ∘ local`: the pose of a child frame given in this frame.
    pub fn compose(&self, local: &Pose2) -> Pose2 {
        Pose2::from_parts(self.transform_point(local.pos), self.angle + local.angle)
    }

    /// Translation distance and wrapped angle difference `other − self`.
    pub fn delta_to(&self, other: &Pose2) -> (Vec2, f64) {
        (other.pos - self.pos, angle_diff(other.angle, self.angle))
    }

    pub fn is_finite(&self) -> bool {
        self.pos.is_finite() && self.angle.is_finite()
    }

    /// Linear interpolation of position and shortest-arc interpolation of angle.
    pub fn interpolate(&self, other: &Pose2, t: f64) -> Pose2 {
        Pose2::from_parts(
            self.pos.lerp(other.pos, t),
            self.angle + t * angle_diff(other.angle, self.angle),
        )
    }
}
