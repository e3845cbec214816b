//! SU(2) as unit quaternions.
//!
//! The maximal torus is the circle through 𝕜: the alcove coordinate `t ∈ [0,1]`
//! corresponds to `cos πt + sin πt 𝕜`, i.e. `diag(e^{iπt}, e^{-iπt})` under
//! the matrix identification of [`Su2::to_matrix`].

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Mul, Neg};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Threshold on `1 - |w|` below which an element counts as central.
pub const CENTRAL_EPS: f64 = 1e-10;

/// Longest product chain evaluated before renormalizing.
pub const RENORMALIZE_EVERY: usize = 16;

/// A unit quaternion `w + x𝕚 + y𝕛 + z𝕜`.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawQuaternion")]
pub struct Su2 {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Deserialize)]
struct RawQuaternion {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl TryFrom<RawQuaternion> for Su2 {
    type Error = String;

    fn try_from(r: RawQuaternion) -> std::result::Result<Self, String> {
        let q = Su2 { w: r.w, x: r.x, y: r.y, z: r.z };
        if (q.norm() - 1.0).abs() > 1e-9 {
            return Err(format!("quaternion norm {} is not 1", q.norm()));
        }
        Ok(q)
    }
}

impl fmt::Debug for Su2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i + {}j + {}k)", self.w, self.x, self.y, self.z)
    }
}

impl Su2 {
    pub const ONE: Su2 = Su2 { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };
    pub const MINUS_ONE: Su2 = Su2 { w: -1.0, x: 0.0, y: 0.0, z: 0.0 };
    pub const I: Su2 = Su2 { w: 0.0, x: 1.0, y: 0.0, z: 0.0 };
    pub const J: Su2 = Su2 { w: 0.0, x: 0.0, y: 1.0, z: 0.0 };
    pub const K: Su2 = Su2 { w: 0.0, x: 0.0, y: 0.0, z: 1.0 };

    /// Builds a quaternion from raw components and projects it onto the unit sphere.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Su2 {
        Su2 { w, x, y, z }.normalized()
    }

    /// Torus element `exp(t) = cos πt + sin πt 𝕜`.
    pub fn torus(t: f64) -> Su2 {
        let (s, c) = (PI * t).sin_cos();
        Su2 { w: c, x: 0.0, y: 0.0, z: s }
    }

    /// `cos πt + sin πt (axis)`: the element whose adjoint action rotates by `2πt` about `axis`.
    pub fn from_axis_angle(axis: SpherePoint, t: f64) -> Su2 {
        let (s, c) = (PI * t).sin_cos();
        let [x, y, z] = axis.0;
        Su2 { w: c, x: s * x, y: s * y, z: s * z }
    }

    /// Haar-random element.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Su2 {
        loop {
            let w: f64 = rng.sample(StandardNormal);
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            let z: f64 = rng.sample(StandardNormal);
            let n = (w * w + x * x + y * y + z * z).sqrt();
            if n > 1e-6 {
                return Su2 { w: w / n, x: x / n, y: y / n, z: z / n };
            }
        }
    }

    pub fn norm(self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn normalized(self) -> Su2 {
        let n = self.norm();
        Su2 { w: self.w / n, x: self.x / n, y: self.y / n, z: self.z / n }
    }

    pub fn inverse(self) -> Su2 {
        Su2 { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    /// Four-dimensional Euclidean inner product.
    pub fn dot(self, o: Su2) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    /// Vector (imaginary) part.
    pub fn vector(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Geodesic distance on S³ ≅ SU(2); lies in `[0, π]`.
    pub fn distance(self, o: Su2) -> f64 {
        let d = ((self.w - o.w).powi(2)
            + (self.x - o.x).powi(2)
            + (self.y - o.y).powi(2)
            + (self.z - o.z).powi(2))
        .sqrt();
        let s = ((self.w + o.w).powi(2)
            + (self.x + o.x).powi(2)
            + (self.y + o.y).powi(2)
            + (self.z + o.z).powi(2))
        .sqrt();
        2.0 * d.atan2(s)
    }

    /// Largest componentwise difference.
    pub fn max_diff(self, o: Su2) -> f64 {
        (self.w - o.w)
            .abs()
            .max((self.x - o.x).abs())
            .max((self.y - o.y).abs())
            .max((self.z - o.z).abs())
    }

    pub fn is_central(self) -> bool {
        self.w.abs() >= 1.0 - CENTRAL_EPS
    }

    /// `g · self · g⁻¹`
    pub fn conjugated_by(self, g: Su2) -> Su2 {
        g * self * g.inverse()
    }

    /// Ordered product, renormalized every [`RENORMALIZE_EVERY`] factors.
    pub fn product<I: IntoIterator<Item = Su2>>(factors: I) -> Su2 {
        let mut acc = Su2::ONE;
        for (n, f) in factors.into_iter().enumerate() {
            acc = acc * f;
            if (n + 1) % RENORMALIZE_EVERY == 0 {
                acc = acc.normalized();
            }
        }
        acc.normalized()
    }

    /// `[a, b] = a b a⁻¹ b⁻¹`
    pub fn commutator(a: Su2, b: Su2) -> Su2 {
        (a * b * a.inverse() * b.inverse()).normalized()
    }

    /// Matrix form `[[w + iz, x + iy], [-x + iy, w - iz]]`; 𝕜 maps to `diag(i, -i)`.
    pub fn to_matrix(self) -> [[Complex64; 2]; 2] {
        [
            [Complex64::new(self.w, self.z), Complex64::new(self.x, self.y)],
            [Complex64::new(-self.x, self.y), Complex64::new(self.w, -self.z)],
        ]
    }

    /// First column of [`Su2::to_matrix`], the image of `(1, 0)ᵀ`.
    pub fn first_column(self) -> [Complex64; 2] {
        [Complex64::new(self.w, self.z), Complex64::new(-self.x, self.y)]
    }
}

impl Mul for Su2 {
    type Output = Su2;

    fn mul(self, r: Su2) -> Su2 {
        Su2 {
            w: self.w * r.w - self.x * r.x - self.y * r.y - self.z * r.z,
            x: self.w * r.x + self.x * r.w + self.y * r.z - self.z * r.y,
            y: self.w * r.y - self.x * r.z + self.y * r.w + self.z * r.x,
            z: self.w * r.z + self.x * r.y - self.y * r.x + self.z * r.w,
        }
    }
}

impl Neg for Su2 {
    type Output = Su2;

    fn neg(self) -> Su2 {
        Su2 { w: -self.w, x: -self.x, y: -self.y, z: -self.z }
    }
}

/// Normalized holonomy angle `t ∈ [0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AlcoveAngle(pub f64);

impl AlcoveAngle {
    pub fn new(t: f64) -> AlcoveAngle {
        AlcoveAngle(t.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The torus element `exp(t)`.
    pub fn exp(self) -> Su2 {
        Su2::torus(self.0)
    }
}

/// A unit vector in ℝ³, read as an imaginary unit quaternion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpherePoint(pub [f64; 3]);

impl SpherePoint {
    pub const NORTH: SpherePoint = SpherePoint([0.0, 0.0, 1.0]);

    pub fn new(v: [f64; 3]) -> SpherePoint {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        SpherePoint([v[0] / n, v[1] / n, v[2] / n])
    }

    pub fn dot(self, o: SpherePoint) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn as_quaternion(self) -> Su2 {
        Su2 { w: 0.0, x: self.0[0], y: self.0[1], z: self.0[2] }
    }

    /// An element `h` with `h 𝕜 h⁻¹ = self`.
    pub fn frame_from_north(self) -> Su2 {
        let [x, y, z] = self.0;
        if z >= 0.0 {
            // shortest arc from 𝕜
            Su2::new(1.0 + z, -y, x, 0.0)
        } else {
            // shortest arc from -𝕜, after the half turn 𝕚 taking 𝕜 to -𝕜
            Su2::new(1.0 - z, y, -x, 0.0) * Su2::I
        }
    }
}

/// Alcove coordinate of `g` and a conjugator `h` with `h exp(t) h⁻¹ = g`.
///
/// `h = 1` whenever the vector part of `g` vanishes.
pub fn to_alcove(g: Su2) -> (AlcoveAngle, Su2) {
    let v = g.vector();
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let t = AlcoveAngle::new(r.atan2(g.w) / PI);
    if r <= 1e-300 {
        return (t, Su2::ONE);
    }
    let axis = SpherePoint([v[0] / r, v[1] / r, v[2] / r]);
    (t, axis.frame_from_north())
}

/// Rotation axis and alcove angle of a non-central element.
pub fn axis_angle(g: Su2) -> Result<(SpherePoint, AlcoveAngle)> {
    if g.is_central() {
        return Err(Error::CentralElement(g.w.abs()));
    }
    let (t, _) = to_alcove(g);
    Ok((SpherePoint::new(g.vector()), t))
}

/// Image of `p` under `q ↦ g q g⁻¹` on imaginary quaternions.
pub fn adjoint_rotate(g: Su2, p: SpherePoint) -> SpherePoint {
    let r = g * p.as_quaternion() * g.inverse();
    SpherePoint::new(r.vector())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: Su2, b: Su2, tol: f64) -> bool {
        a.max_diff(b) <= tol
    }

    #[test]
    fn quaternion_table() {
        assert!(close(Su2::K * Su2::I, Su2::J, 0.0));
        assert!(close(Su2::K * Su2::K, Su2::MINUS_ONE, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = Su2::random(&mut rng);
        assert!(close(q * q.inverse(), Su2::ONE, 1e-15));
    }

    #[test]
    fn alcove_of_identity_and_k() {
        let (t, h) = to_alcove(Su2::ONE);
        assert_eq!(t.0, 0.0);
        assert_eq!(h, Su2::ONE);
        let (t, h) = to_alcove(Su2::K);
        assert!((t.0 - 0.5).abs() < 1e-15);
        assert!(close(h, Su2::ONE, 1e-15));
        let (t, _) = to_alcove(Su2::MINUS_ONE);
        assert_eq!(t.0, 1.0);
    }

    #[test]
    fn alcove_of_i_direction() {
        let g = Su2::new((0.3 * PI).cos(), (0.3 * PI).sin(), 0.0, 0.0);
        let (t, h) = to_alcove(g);
        assert!((t.0 - 0.3).abs() < 1e-12);
        assert!(close(Su2::torus(t.0).conjugated_by(h), g, 1e-10));
        let axis = adjoint_rotate(h, SpherePoint::NORTH);
        assert!((axis.0[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn alcove_of_south_pointing_axis() {
        let g = Su2::new(0.2, 1e-7, -2e-7, -0.9);
        let (t, h) = to_alcove(g);
        assert!(close(Su2::torus(t.0).conjugated_by(h), g, 1e-12));
    }

    #[test]
    fn axis_angle_examples() {
        let (axis, t) = axis_angle(Su2::K).unwrap();
        assert_eq!(axis, SpherePoint::NORTH);
        assert!((t.0 - 0.5).abs() < 1e-15);
        let g = Su2::new((0.25 * PI).cos(), 0.0, (0.25 * PI).sin(), 0.0);
        let (axis, t) = axis_angle(g).unwrap();
        assert!((axis.0[1] - 1.0).abs() < 1e-15);
        assert!((t.0 - 0.25).abs() < 1e-15);
        assert!(matches!(axis_angle(Su2::MINUS_ONE), Err(Error::CentralElement(_))));
    }

    #[test]
    fn adjoint_rotation_examples() {
        let p = SpherePoint([1.0, 0.0, 0.0]);
        assert_eq!(adjoint_rotate(Su2::ONE, p), p);
        let r = adjoint_rotate(Su2::K, p);
        assert!((r.0[0] + 1.0).abs() < 1e-15 && r.0[1].abs() < 1e-15);
        let r = adjoint_rotate(Su2::torus(0.25), p);
        assert!(r.0[0].abs() < 1e-15 && (r.0[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn distance_between_antipodes() {
        assert!((Su2::ONE.distance(Su2::MINUS_ONE) - PI).abs() < 1e-15);
        assert_eq!(Su2::ONE.distance(Su2::ONE), 0.0);
    }

    #[test]
    fn matrix_identification_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = Su2::random(&mut rng);
        let b = Su2::random(&mut rng);
        let (ma, mb, mab) = (a.to_matrix(), b.to_matrix(), (a * b).to_matrix());
        for r in 0..2 {
            for c in 0..2 {
                let v = ma[r][0] * mb[0][c] + ma[r][1] * mb[1][c];
                assert!((v - mab[r][c]).norm() < 1e-14);
            }
        }
        let k = Su2::K.to_matrix();
        assert_eq!(k[0][0], Complex64::new(0.0, 1.0));
        assert_eq!(k[1][1], Complex64::new(0.0, -1.0));
    }
}
