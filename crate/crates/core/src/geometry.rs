//! Spatial primitives: 3D vectors, diagonal gain matrices, the y/z rotation
//! matrices used by the rotational avoidance potential, and the angle helpers
//! used by obstacle detection.
//!
//! Transcendental functions go through `libm` so that simulation output is
//! bit-identical across platforms.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Norm below which a vector is treated as zero by [`angle_between`].
pub const ZERO_VECTOR_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid range: safety range {safety} must be below detection range {detection}")]
    InvalidRange { safety: f64, detection: f64 },
    #[error("zero-length vector has no direction")]
    ZeroVector,
}

/// A 3D vector in the inertial frame. Positions in m, velocities in m/s,
/// accelerations in m/s² depending on context.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vector3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vector3 {
    pub const ZERO: Vector3 = Vector3 { x: 0.0, y: 0.0, z: 0.0 };
    pub const X: Vector3 = Vector3 { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: Vector3 = Vector3 { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: Vector3 = Vector3 { x: 0.0, y: 0.0, z: 1.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn dot(self, other: Vector3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn cross(self, other: Vector3) -> Vector3 {
        Vector3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    #[inline]
    pub fn distance(self, other: Vector3) -> f64 {
        (self - other).norm()
    }

    #[inline]
    pub fn distance_squared(self, other: Vector3) -> f64 {
        (self - other).norm_squared()
    }

    /// Unit vector in the same direction, or `None` for a (near) zero vector.
    pub fn normalized(self) -> Option<Vector3> {
        let n = self.norm();
        (n >= ZERO_VECTOR_EPS).then(|| self / n)
    }

    /// Rescales the vector so its norm does not exceed `max_norm`.
    pub fn clamp_norm(self, max_norm: f64) -> Vector3 {
        let n = self.norm();
        if n.is_infinite() && self.is_finite() {
            // squares overflowed; clamp a rescaled copy instead
            let s = self.x.abs().max(self.y.abs()).max(self.z.abs());
            return (self / s).clamp_norm(max_norm / s) * s;
        }
        if n > max_norm {
            self * (max_norm / n)
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Horizontal projection (z set to zero).
    pub fn horizontal(self) -> Vector3 {
        Vector3::new(self.x, self.y, 0.0)
    }

    pub fn component_mul(self, other: Vector3) -> Vector3 {
        Vector3::new(self.x * other.x, self.y * other.y, self.z * other.z)
    }

    pub fn min_components(self, other: Vector3) -> Vector3 {
        Vector3::new(self.x.min(other.x), self.y.min(other.y), self.z.min(other.z))
    }

    pub fn max_components(self, other: Vector3) -> Vector3 {
        Vector3::new(self.x.max(other.x), self.y.max(other.y), self.z.max(other.z))
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vector3 {
    fn from(a: [f64; 3]) -> Self {
        Vector3::new(a[0], a[1], a[2])
    }
}

impl From<Vector3> for [f64; 3] {
    fn from(v: Vector3) -> Self {
        v.to_array()
    }
}

impl Index<usize> for Vector3 {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vector3 index {i} out of range"),
        }
    }
}

impl fmt::Display for Vector3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl Add for Vector3 {
    type Output = Vector3;
    #[inline]
    fn add(self, o: Vector3) -> Vector3 {
        Vector3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vector3 {
    #[inline]
    fn add_assign(&mut self, o: Vector3) {
        *self = *self + o;
    }
}

impl Sub for Vector3 {
    type Output = Vector3;
    #[inline]
    fn sub(self, o: Vector3) -> Vector3 {
        Vector3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vector3 {
    #[inline]
    fn sub_assign(&mut self, o: Vector3) {
        *self = *self - o;
    }
}

impl Mul<f64> for Vector3 {
    type Output = Vector3;
    #[inline]
    fn mul(self, s: f64) -> Vector3 {
        Vector3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vector3> for f64 {
    type Output = Vector3;
    #[inline]
    fn mul(self, v: Vector3) -> Vector3 {
        v * self
    }
}

impl Div<f64> for Vector3 {
    type Output = Vector3;
    #[inline]
    fn div(self, s: f64) -> Vector3 {
        Vector3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vector3 {
    type Output = Vector3;
    #[inline]
    fn neg(self) -> Vector3 {
        Vector3::new(-self.x, -self.y, -self.z)
    }
}

/// Diagonal 3×3 matrix, the shape of every matrix gain in the controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Diag3(pub [f64; 3]);

impl Diag3 {
    pub const IDENTITY: Diag3 = Diag3([1.0, 1.0, 1.0]);
    pub const ZERO: Diag3 = Diag3([0.0, 0.0, 0.0]);

    pub const fn uniform(v: f64) -> Self {
        Diag3([v, v, v])
    }

    pub fn is_positive_definite(&self) -> bool {
        self.0.iter().all(|&d| d.is_finite() && d > 0.0)
    }

    pub fn is_identity(&self) -> bool {
        self.0 == [1.0, 1.0, 1.0]
    }
}

impl From<[f64; 3]> for Diag3 {
    fn from(a: [f64; 3]) -> Self {
        Diag3(a)
    }
}

impl From<Diag3> for [f64; 3] {
    fn from(d: Diag3) -> Self {
        d.0
    }
}

impl Mul<Vector3> for Diag3 {
    type Output = Vector3;
    #[inline]
    fn mul(self, v: Vector3) -> Vector3 {
        Vector3::new(self.0[0] * v.x, self.0[1] * v.y, self.0[2] * v.z)
    }
}

/// Row-major 3×3 rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix3 {
    m: [[f64; 3]; 3],
}

impl RotationMatrix3 {
    pub const IDENTITY: RotationMatrix3 = RotationMatrix3 {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub fn entries(&self) -> [[f64; 3]; 3] {
        self.m
    }

    pub fn apply(&self, v: Vector3) -> Vector3 {
        let m = &self.m;
        Vector3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn transpose(&self) -> RotationMatrix3 {
        let mut t = [[0.0; 3]; 3];
        for (r, row) in self.m.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                t[c][r] = *v;
            }
        }
        RotationMatrix3 { m: t }
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Largest absolute entry of `selfᵀ·self − I`.
    pub fn orthonormality_error(&self) -> f64 {
        let p = self.transpose() * *self;
        let mut worst: f64 = 0.0;
        for r in 0..3 {
            for c in 0..3 {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((p.m[r][c] - target).abs());
            }
        }
        worst
    }
}

impl Mul for RotationMatrix3 {
    type Output = RotationMatrix3;

    fn mul(self, o: RotationMatrix3) -> RotationMatrix3 {
        let mut out = [[0.0; 3]; 3];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.m[r][k] * o.m[k][c]).sum();
            }
        }
        RotationMatrix3 { m: out }
    }
}

/// Right-handed rotation about the z axis. The upper-left 2×2 block is the
/// planar avoidance rotation.
pub fn rotation_z(alpha: f64) -> RotationMatrix3 {
    let (s, c) = (libm::sin(alpha), libm::cos(alpha));
    RotationMatrix3 {
        m: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
    }
}

/// Rotation about the y axis with `[0][2] = +sin α` and `[2][0] = −sin α`.
pub fn rotation_y(alpha: f64) -> RotationMatrix3 {
    let (s, c) = (libm::sin(alpha), libm::cos(alpha));
    RotationMatrix3 {
        m: [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]],
    }
}

/// Avoidance rotation angle as a function of the agent–obstacle distance.
///
/// A linear ramp from π/2 just outside the safety range down to 0 at the
/// detection range; zero everywhere else:
///
/// ```text
/// α = (π/2)·(r_d − dist)/(r_d − r_s)   for r_s < dist < r_d
/// α = 0                                 otherwise
/// ```
pub fn avoidance_angle(dist: f64, safety_range: f64, detection_range: f64) -> Result<f64, GeometryError> {
    if !(safety_range < detection_range) {
        return Err(GeometryError::InvalidRange {
            safety: safety_range,
            detection: detection_range,
        });
    }
    if dist > safety_range && dist < detection_range {
        Ok(FRAC_PI_2 * (detection_range - dist) / (detection_range - safety_range))
    } else {
        Ok(0.0)
    }
}

/// Unsigned angle between two vectors in `[0, π]`.
pub fn angle_between(a: Vector3, b: Vector3) -> Result<f64, GeometryError> {
    let (na, nb) = (a.norm(), b.norm());
    if na < ZERO_VECTOR_EPS || nb < ZERO_VECTOR_EPS {
        return Err(GeometryError::ZeroVector);
    }
    Ok(libm::atan2(a.cross(b).norm(), a.dot(b)))
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a % (2.0 * PI);
    if w <= -PI {
        w += 2.0 * PI;
    } else if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Planar heading angle of a direction, `atan2(y, x)`.
pub fn heading_of(v: Vector3) -> f64 {
    libm::atan2(v.y, v.x)
}
