//! The three-punctured sphere.
//!
//! Representation classes of the trinion are parametrized by the tetrahedron
//! `t₁+t₂+t₃ ≤ 2, tᵢ ≤ tⱼ + t_k` of alcove-angle triples.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{WeightedFrame, WEIGHT_EPS};
use crate::moduli::{normalize, puncture_torus_action, ExtendedPoint, SurfaceSignature};
use crate::su2::{to_alcove, AlcoveAngle, Su2};

/// Boundary tolerance for the tetrahedron inequalities.
pub const TETRA_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AngleTriple(pub [f64; 3]);

impl AngleTriple {
    pub fn new(t: [f64; 3]) -> AngleTriple {
        AngleTriple(t)
    }

    /// `[2 - Σt, t₂+t₃-t₁, t₁+t₃-t₂, t₁+t₂-t₃]`, all nonnegative on the tetrahedron.
    pub fn slacks(self) -> [f64; 4] {
        let [a, b, c] = self.0;
        [2.0 - a - b - c, b + c - a, a + c - b, a + b - c]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratum {
    Interior,
    Face,
    Edge,
    Vertex,
    Outside,
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stratum::Interior => "interior",
            Stratum::Face => "face",
            Stratum::Edge => "edge",
            Stratum::Vertex => "vertex",
            Stratum::Outside => "outside",
        };
        f.write_str(s)
    }
}

pub fn in_tetrahedron(a: AngleTriple) -> Stratum {
    let s = a.slacks();
    if s.iter().any(|&x| x < -TETRA_TOL) {
        return Stratum::Outside;
    }
    match s.iter().filter(|&&x| x.abs() <= TETRA_TOL).count() {
        0 => Stratum::Interior,
        1 => Stratum::Face,
        2 => Stratum::Edge,
        _ => Stratum::Vertex,
    }
}

fn snap(t: f64) -> f64 {
    if t.abs() <= TETRA_TOL {
        0.0
    } else if (t - 1.0).abs() <= TETRA_TOL {
        1.0
    } else {
        t
    }
}

/// Normalized representative with the given holonomy angles.
///
/// `K₁ = exp(t₁)`; `K₂` has its axis in the xz-plane (`x ≥ 0`) at the angle `d`
/// fixed by `Re(K₁K₂) = cos πt₃`; `K₃ = (K₁K₂)⁻¹`.
pub fn angles_to_rep(a: AngleTriple) -> Result<ExtendedPoint> {
    let [t1, t2, t3] = a.0;
    if in_tetrahedron(a) == Stratum::Outside {
        return Err(Error::OutsideTetrahedron(t1, t2, t3));
    }
    let (t1, t2, t3) = (snap(t1), snap(t2), snap(t3));
    let w1 = WeightedFrame::implode(Su2::ONE, AlcoveAngle(t1));
    let central = |t: f64| t == 0.0 || t == 1.0;
    let w2 = if central(t1) || central(t2) {
        WeightedFrame::implode(Su2::ONE, AlcoveAngle(t2))
    } else {
        let (s1, c1) = (PI * t1).sin_cos();
        let (s2, c2) = (PI * t2).sin_cos();
        let cos_d = (c1 * c2 - (PI * t3).cos()) / (s1 * s2);
        if cos_d.abs() > 1.0 + TETRA_TOL {
            return Err(Error::OutsideTetrahedron(t1, t2, t3));
        }
        // on a face the axes are collinear; acos would amplify the slack
        let slack = a.slacks();
        let d = if slack[0].abs() <= TETRA_TOL || slack[3].abs() <= TETRA_TOL {
            0.0
        } else if slack[1].abs() <= TETRA_TOL || slack[2].abs() <= TETRA_TOL {
            PI
        } else {
            cos_d.clamp(-1.0, 1.0).acos()
        };
        let (sh, ch) = (d / 2.0).sin_cos();
        WeightedFrame::implode(Su2 { w: ch, x: 0.0, y: sh, z: 0.0 }, AlcoveAngle(t2))
    };
    let k3 = (w1.holonomy() * w2.holonomy()).inverse().normalized();
    let w3 = WeightedFrame::implode(to_alcove(k3).1, AlcoveAngle(t3));
    ExtendedPoint::new(SurfaceSignature::trinion(), vec![], vec![], vec![w1, w2, w3])
}

/// The moment map: the three holonomy angles.
pub fn rep_to_angles(p: &ExtendedPoint) -> AngleTriple {
    let t = |i: usize| p.frames[i].moment_angle().0;
    AngleTriple([t(0), t(1), t(2)])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartCoordinates {
    pub z: [Complex64; 3],
}

fn wedge(u: [Complex64; 2], v: [Complex64; 2]) -> Complex64 {
    u[0] * v[1] - u[1] * v[0]
}

fn check_trinion(p: &ExtendedPoint) -> Result<()> {
    if p.signature != SurfaceSignature::trinion() {
        return Err(Error::InvalidSignature(format!(
            "expected a trinion point, got genus {} with {} punctures",
            p.signature.genus, p.signature.punctures
        )));
    }
    Ok(())
}

/// Chart functions near the trivial vertex:
/// `Z₁ = r₁ (C₁^{1/2}D₂e₁ ∧ D₃e₁)`, `Z₂ = -r₂ (D₃e₁ ∧ D₁e₁)`,
/// `Z₃ = r₃ (C₁^{1/2}D₂e₁ ∧ D₁e₁)` with `rᵢ` the angle slacks of the faces.
pub fn chart_coordinates(p: &ExtendedPoint) -> Result<ChartCoordinates> {
    check_trinion(p)?;
    for (i, w) in p.frames.iter().enumerate() {
        if w.weight() <= WEIGHT_EPS {
            return Err(Error::CollapsedFrame(i));
        }
    }
    let theta: Vec<f64> = p.frames.iter().map(|w| PI * w.moment_angle().0).collect();
    let r1 = theta[1] + theta[2] - theta[0];
    let r2 = theta[0] + theta[2] - theta[1];
    let r3 = theta[0] + theta[1] - theta[2];
    let half = Su2::torus(p.frames[0].moment_angle().0 / 2.0);
    let d1 = p.frames[0].frame().first_column();
    let c_d2 = (half * p.frames[1].frame()).first_column();
    let d3 = p.frames[2].frame().first_column();
    Ok(ChartCoordinates {
        z: [r1 * wedge(c_d2, d3), -r2 * wedge(d3, d1), r3 * wedge(c_d2, d1)],
    })
}

/// Anti-symplectic involution induced by complex conjugation of the sphere:
/// `(D₁, D₂, D₃) ↦ (J D₁ J⁻¹, J K₁ D₂ J⁻¹, J D₃ J⁻¹)` with `J = 𝕚`, angles fixed.
pub fn real_involution(p: &ExtendedPoint) -> Result<ExtendedPoint> {
    check_trinion(p)?;
    for i in [1, 2] {
        if p.frames[i].weight() <= WEIGHT_EPS {
            return Err(Error::CollapsedFrame(i));
        }
    }
    let j = Su2::I;
    let k1 = p.frames[0].holonomy();
    let img = |q: Su2| (j * q * j.inverse()).normalized();
    let f = &p.frames;
    let frames = vec![
        WeightedFrame::implode(img(f[0].frame()), f[0].moment_angle()),
        WeightedFrame::implode(img(k1 * f[1].frame()), f[1].moment_angle()),
        WeightedFrame::implode(img(f[2].frame()), f[2].moment_angle()),
    ];
    ExtendedPoint::new(p.signature, vec![], vec![], frames)
}

/// Reduces `v` modulo the lattice `2ℤ³ + ℤ(1,1,1)` of torus parameters that
/// act trivially on a fiber.
pub fn wrap_fiber(v: [f64; 3]) -> [f64; 3] {
    let red = |x: f64| x - 2.0 * ((x + 1.0) / 2.0).floor();
    let a = v.map(red);
    let b = [v[0] - 1.0, v[1] - 1.0, v[2] - 1.0].map(red);
    let n = |u: &[f64; 3]| u.iter().map(|x| x * x).sum::<f64>();
    if n(&a) <= n(&b) {
        a
    } else {
        b
    }
}

/// The point of the fiber over `reference`'s angles at torus parameters `tau`.
pub fn fiber_point(reference: &ExtendedPoint, tau: [f64; 3]) -> Result<ExtendedPoint> {
    let mut p = reference.clone();
    for (i, t) in tau.iter().enumerate() {
        p = puncture_torus_action(&p, i, *t)?;
    }
    Ok(p)
}

/// Torus parameters of `p` relative to `reference` (both over the same interior angles).
pub fn fiber_coordinates(reference: &ExtendedPoint, p: &ExtendedPoint) -> Result<[f64; 3]> {
    let r = normalize(reference)?;
    let q = normalize(p)?;
    let mut tau = [0.0; 3];
    for i in 0..3 {
        if r.frames[i].holonomy().max_diff(q.frames[i].holonomy()) > 1e-8 {
            return Err(Error::InvalidSignature("points lie in different fibers".into()));
        }
        let ratio = r.frames[i].frame().inverse() * q.frames[i].frame();
        tau[i] = -ratio.z.atan2(ratio.w) / PI;
    }
    Ok(wrap_fiber(tau))
}

/// Real points in the torus fiber over an interior triple, found by Newton
/// iteration on `τ ↦ coords(I(p_τ)) - τ` from a grid of starts.
pub fn real_points_in_fiber(a: AngleTriple) -> Result<Vec<[f64; 3]>> {
    if in_tetrahedron(a) != Stratum::Interior {
        return Err(Error::OutsideTetrahedron(a.0[0], a.0[1], a.0[2]));
    }
    let reference = angles_to_rep(a)?;
    let defect = |tau: [f64; 3]| -> Result<[f64; 3]> {
        let p = fiber_point(&reference, tau)?;
        let c = fiber_coordinates(&reference, &real_involution(&p)?)?;
        Ok(wrap_fiber([c[0] - tau[0], c[1] - tau[1], c[2] - tau[2]]))
    };
    let mut found: Vec<[f64; 3]> = Vec::new();
    let steps = [0.0, 0.5, 1.0, 1.5];
    for &x in &steps {
        for &y in &steps {
            for &z in &steps[..2] {
                let mut tau = [x + 0.1, y + 0.2, z + 0.3];
                for _ in 0..20 {
                    let f0 = defect(tau)?;
                    if f0.iter().all(|v| v.abs() < 1e-13) {
                        break;
                    }
                    // Jacobian by forward differences
                    let h = 1e-6;
                    let mut jac = nalgebra::Matrix3::<f64>::zeros();
                    for c in 0..3 {
                        let mut t2 = tau;
                        t2[c] += h;
                        let f1 = defect(t2)?;
                        for r in 0..3 {
                            jac[(r, c)] = wrap_fiber([f1[r] - f0[r], 0.0, 0.0])[0] / h;
                        }
                    }
                    let Some(inv) = jac.try_inverse() else { break };
                    let step = inv * nalgebra::Vector3::new(f0[0], f0[1], f0[2]);
                    tau = [tau[0] - step[0], tau[1] - step[1], tau[2] - step[2]];
                }
                let f = defect(tau)?;
                if f.iter().all(|v| v.abs() < 1e-9) {
                    let w = wrap_fiber(tau);
                    let dup = found.iter().any(|u| {
                        wrap_fiber([u[0] - w[0], u[1] - w[1], u[2] - w[2]])
                            .iter()
                            .all(|v| v.abs() < 1e-6)
                    });
                    if !dup {
                        found.push(w);
                    }
                }
            }
        }
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moduli::{conjugate_point, relation_residual};

    #[test]
    fn strata_examples() {
        assert_eq!(in_tetrahedron(AngleTriple([0.5, 0.5, 0.5])), Stratum::Interior);
        assert_eq!(in_tetrahedron(AngleTriple([0.0, 1.0, 1.0])), Stratum::Vertex);
        assert_eq!(in_tetrahedron(AngleTriple([0.9, 0.9, 0.9])), Stratum::Outside);
        assert_eq!(in_tetrahedron(AngleTriple([0.0, 0.3, 0.3])), Stratum::Edge);
        assert_eq!(in_tetrahedron(AngleTriple([0.7, 0.3, 0.4])), Stratum::Face);
    }

    #[test]
    fn equilateral_reconstruction() {
        let p = angles_to_rep(AngleTriple([0.5, 0.5, 0.5])).unwrap();
        let k: Vec<Su2> = p.holonomies();
        assert!(k[0].max_diff(Su2::K) < 1e-15);
        assert!(k[1].max_diff(Su2::I) < 1e-15);
        assert!(k[2].max_diff(-Su2::J) < 1e-15);
        assert!(relation_residual(&p) <= 1e-12);
    }

    #[test]
    fn degenerate_reconstructions() {
        let p = angles_to_rep(AngleTriple([0.5, 0.5, 1.0])).unwrap();
        let k = p.holonomies();
        assert!(k[1].max_diff(Su2::K) < 1e-15);
        assert_eq!(k[2], Su2::MINUS_ONE);
        let p = angles_to_rep(AngleTriple([0.0, 0.0, 0.0])).unwrap();
        assert!(p.frames.iter().all(|w| *w == WeightedFrame::NORTH));
        assert!(matches!(
            angles_to_rep(AngleTriple([0.9, 0.9, 0.9])),
            Err(Error::OutsideTetrahedron(..))
        ));
        for t in [[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0], [1.0, 0.3, 0.7], [0.4, 0.0, 0.4]] {
            let p = angles_to_rep(AngleTriple(t)).unwrap();
            assert!(relation_residual(&p) <= 1e-12, "{t:?}");
        }
    }

    #[test]
    fn angles_are_conjugation_invariant() {
        let p = angles_to_rep(AngleTriple([0.3, 0.4, 0.5])).unwrap();
        let q = conjugate_point(&p, Su2::new(0.1, 0.7, -0.3, 0.2));
        assert_eq!(rep_to_angles(&q), rep_to_angles(&p));
        let triv = ExtendedPoint::trivial(SurfaceSignature::trinion());
        assert_eq!(rep_to_angles(&triv).0, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn chart_vanishes_on_its_face() {
        let p = angles_to_rep(AngleTriple([0.5, 0.5, 0.5])).unwrap();
        let z = chart_coordinates(&p).unwrap().z;
        assert!(z.iter().all(|c| c.norm() > 1e-3));
        let p = angles_to_rep(AngleTriple([0.7, 0.3, 0.4])).unwrap();
        let z = chart_coordinates(&p).unwrap().z;
        assert_eq!(z[0].norm(), 0.0);
        let triv = ExtendedPoint::trivial(SurfaceSignature::trinion());
        assert_eq!(chart_coordinates(&triv), Err(Error::CollapsedFrame(0)));
    }

    #[test]
    fn involution_squares_to_identity() {
        let p = angles_to_rep(AngleTriple([0.3, 0.4, 0.5])).unwrap();
        let p = fiber_point(&p, [0.3, -0.7, 1.1]).unwrap();
        let back = real_involution(&real_involution(&p).unwrap()).unwrap();
        assert!(back.max_diff(&p) < 1e-12);
        assert_eq!(rep_to_angles(&real_involution(&p).unwrap()), rep_to_angles(&p));
        assert!(relation_residual(&real_involution(&p).unwrap()) < 1e-12);
    }

    #[test]
    fn involution_matches_holonomy_formula() {
        let p = angles_to_rep(AngleTriple([0.3, 0.4, 0.5])).unwrap();
        let p = fiber_point(&p, [0.0, 0.45, -0.2]).unwrap();
        let k = p.holonomies();
        let k2 = real_involution(&p).unwrap().holonomies();
        let j = Su2::I;
        assert!(k2[0].max_diff(k[0]) < 1e-12);
        let expect2 = k[0].inverse() * j * k[1].inverse() * j.inverse() * k[0];
        assert!(k2[1].max_diff(expect2) < 1e-12);
        assert!(k2[2].max_diff(j * k[2].inverse() * j.inverse()) < 1e-12);
    }

    #[test]
    fn fiber_has_eight_real_points() {
        let pts = real_points_in_fiber(AngleTriple([0.3, 0.4, 0.5])).unwrap();
        assert_eq!(pts.len(), 8);
    }
}
