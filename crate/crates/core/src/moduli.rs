//! Points of the extended moduli space of a punctured surface.
//!
//! A point carries handle generators `A_k, B_k` and one weighted frame per
//! puncture, subject to
//!
//! ```text
//! [A_1, B_1] ⋯ [A_g, B_g] · hol(W_1) ⋯ hol(W_n) = c,   c = ±1.
//! ```
//!
//! Glueing rewrites the relation word of the pieces (cyclic rotations and
//! conjugations of single letters) so the result is again in this standard
//! form, and records the glued curve so that its twist flow can be applied.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{WeightedFrame, WEIGHT_EPS};
use crate::su2::{to_alcove, AlcoveAngle, SpherePoint, Su2};

/// Residual bound for membership.
pub const MEMBERSHIP_TOL: f64 = 1e-8;
/// Residual bound for constructed points.
pub const CONSTRUCTION_TOL: f64 = 1e-10;
/// Maximal holonomy-angle difference accepted by [`glue`].
pub const GLUE_ANGLE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Twist {
    Plus,
    Minus,
}

impl Twist {
    pub fn element(self) -> Su2 {
        match self {
            Twist::Plus => Su2::ONE,
            Twist::Minus => Su2::MINUS_ONE,
        }
    }

    pub fn times(self, o: Twist) -> Twist {
        if self == o {
            Twist::Plus
        } else {
            Twist::Minus
        }
    }
}

impl TryFrom<i8> for Twist {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Twist::Plus),
            -1 => Ok(Twist::Minus),
            _ => Err(format!("twist must be 1 or -1, got {v}")),
        }
    }
}

impl From<Twist> for i8 {
    fn from(t: Twist) -> i8 {
        match t {
            Twist::Plus => 1,
            Twist::Minus => -1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceSignature {
    pub genus: usize,
    pub punctures: usize,
    pub twist: Twist,
}

impl SurfaceSignature {
    pub fn new(genus: usize, punctures: usize, twist: Twist) -> SurfaceSignature {
        SurfaceSignature { genus, punctures, twist }
    }

    pub fn trinion() -> SurfaceSignature {
        SurfaceSignature::new(0, 3, Twist::Plus)
    }
}

/// A glued curve recorded on a point, with what its twist flow moves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveHandle {
    /// Curve separating two glued components. The far side is the cyclic block
    /// made of the listed trailing punctures followed by the listed leading handles.
    Separating {
        left_puncture: usize,
        right_puncture: usize,
        side_b_punctures: Vec<usize>,
        side_b_handles: Vec<usize>,
    },
    /// Non-separating curve created by self-glueing; its holonomy is `A_handle`.
    Handle { handle: usize, first_puncture: usize, second_puncture: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointJson")]
pub struct ExtendedPoint {
    pub signature: SurfaceSignature,
    pub a: Vec<Su2>,
    pub b: Vec<Su2>,
    pub frames: Vec<WeightedFrame>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub curves: Vec<CurveHandle>,
}

#[derive(Deserialize)]
struct PointJson {
    signature: SurfaceSignature,
    a: Vec<Su2>,
    b: Vec<Su2>,
    frames: Vec<WeightedFrame>,
    #[serde(default)]
    curves: Vec<CurveHandle>,
}

impl TryFrom<PointJson> for ExtendedPoint {
    type Error = String;

    fn try_from(j: PointJson) -> std::result::Result<Self, String> {
        let s = j.signature;
        if j.a.len() != s.genus || j.b.len() != s.genus || j.frames.len() != s.punctures {
            return Err(format!(
                "generator counts ({}, {}, {}) do not match signature (g={}, n={})",
                j.a.len(),
                j.b.len(),
                j.frames.len(),
                s.genus,
                s.punctures
            ));
        }
        Ok(ExtendedPoint { signature: s, a: j.a, b: j.b, frames: j.frames, curves: j.curves })
    }
}

impl ExtendedPoint {
    pub fn new(
        signature: SurfaceSignature,
        a: Vec<Su2>,
        b: Vec<Su2>,
        frames: Vec<WeightedFrame>,
    ) -> Result<ExtendedPoint> {
        PointJson { signature, a, b, frames, curves: Vec::new() }
            .try_into()
            .map_err(Error::InvalidSignature)
    }

    /// Trivial representation with all frames at the north pole.
    pub fn trivial(signature: SurfaceSignature) -> ExtendedPoint {
        ExtendedPoint {
            signature,
            a: vec![Su2::ONE; signature.genus],
            b: vec![Su2::ONE; signature.genus],
            frames: vec![WeightedFrame::NORTH; signature.punctures],
            curves: Vec::new(),
        }
    }

    pub fn holonomies(&self) -> Vec<Su2> {
        self.frames.iter().map(|w| w.holonomy()).collect()
    }

    /// Ordered product `∏[A,B] ∏ hol(W)`.
    pub fn relation_product(&self) -> Su2 {
        let comms = self.a.iter().zip(&self.b).map(|(&a, &b)| Su2::commutator(a, b));
        Su2::product(comms.chain(self.frames.iter().map(|w| w.holonomy())))
    }

    /// Alcove angles of every generator: frames first, then each `A_k`, `B_k`.
    pub fn angle_spectrum(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.frames.iter().map(|w| w.moment_angle().0).collect();
        for (a, b) in self.a.iter().zip(&self.b) {
            out.push(to_alcove(*a).0 .0);
            out.push(to_alcove(*b).0 .0);
        }
        out
    }

    /// Largest componentwise difference; infinite for different signatures.
    pub fn max_diff(&self, o: &ExtendedPoint) -> f64 {
        if self.signature != o.signature {
            return f64::INFINITY;
        }
        let gens = self
            .a
            .iter()
            .zip(&o.a)
            .chain(self.b.iter().zip(&o.b))
            .map(|(x, y)| x.max_diff(*y));
        let frames = self.frames.iter().zip(&o.frames).map(|(x, y)| x.max_diff(*y));
        gens.chain(frames).fold(0.0, f64::max)
    }

    fn check_puncture(&self, i: usize) -> Result<()> {
        if i >= self.frames.len() {
            return Err(Error::InvalidPuncture { index: i, count: self.frames.len() });
        }
        Ok(())
    }
}

/// Geodesic distance between the relation product and the central twist.
pub fn relation_residual(p: &ExtendedPoint) -> f64 {
    p.relation_product().distance(p.signature.twist.element())
}

/// Random point; the first frame is solved from the relation.
///
/// `target_angles`, if given, prescribes the angles of punctures `2..n`.
pub fn sample_point(
    sig: SurfaceSignature,
    seed: u64,
    target_angles: Option<&[f64]>,
) -> Result<ExtendedPoint> {
    if sig.genus == 0 && sig.punctures == 0 {
        return Err(Error::EmptySignature);
    }
    if let Some(t) = target_angles {
        if t.len() + 1 != sig.punctures {
            return Err(Error::InvalidSignature(format!(
                "expected {} target angles, got {}",
                sig.punctures.saturating_sub(1),
                t.len()
            )));
        }
        if t.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::InvalidSignature("target angles must lie in [0,1]".into()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = sig.twist.element();
    let g = sig.genus;
    let n = sig.punctures;

    if n == 0 {
        let mut a = vec![Su2::ONE; g];
        let mut b = vec![Su2::ONE; g];
        for k in 1..g {
            a[k] = Su2::random(&mut rng);
            b[k] = Su2::random(&mut rng);
        }
        let rest = Su2::product((1..g).map(|k| Su2::commutator(a[k], b[k])));
        let (s, h) = to_alcove(c * rest.inverse());
        let r: f64 = rng.random_range(0.0..2.0);
        let spin = Su2::torus(rng.random_range(0.0..2.0));
        // [exp(s/2), 𝕚 exp(r)] = exp(s)
        let h = h * spin;
        a[0] = Su2::torus(s.0 / 2.0).conjugated_by(h);
        b[0] = (Su2::I * Su2::torus(r)).conjugated_by(h);
        return Ok(ExtendedPoint { signature: sig, a, b, frames: Vec::new(), curves: Vec::new() });
    }

    let a: Vec<Su2> = (0..g).map(|_| Su2::random(&mut rng)).collect();
    let b: Vec<Su2> = (0..g).map(|_| Su2::random(&mut rng)).collect();
    let mut frames = vec![WeightedFrame::NORTH; n];
    for i in 1..n {
        let q = Su2::random(&mut rng);
        let t = match target_angles {
            Some(ts) => ts[i - 1],
            None => rng.random_range(0.0..1.0),
        };
        frames[i] = WeightedFrame::implode(q, AlcoveAngle(t));
    }
    let x = Su2::product(a.iter().zip(&b).map(|(&a, &b)| Su2::commutator(a, b)));
    let y = Su2::product(frames[1..].iter().map(|w| w.holonomy()));
    frames[0] = WeightedFrame::from_holonomy((x.inverse() * c * y.inverse()).normalized());
    Ok(ExtendedPoint { signature: sig, a, b, frames, curves: Vec::new() })
}

/// Global action `(gAg⁻¹, gBg⁻¹, g·W)`.
pub fn conjugate_point(p: &ExtendedPoint, g: Su2) -> ExtendedPoint {
    ExtendedPoint {
        signature: p.signature,
        a: p.a.iter().map(|x| x.conjugated_by(g)).collect(),
        b: p.b.iter().map(|x| x.conjugated_by(g)).collect(),
        frames: p.frames.iter().map(|w| w.left_action(g)).collect(),
        curves: p.curves.clone(),
    }
}

pub fn puncture_torus_action(p: &ExtendedPoint, i: usize, tau: f64) -> Result<ExtendedPoint> {
    p.check_puncture(i)?;
    let mut out = p.clone();
    out.frames[i] = p.frames[i].torus_action(tau);
    Ok(out)
}

/// Conjugates `p` so the first non-central holonomy points to the north pole
/// and the next non-parallel one lies in the `x > 0` half of the xz-plane.
///
/// Holonomies are scanned in the order `hol(W_1..W_n), A_1, B_1, …`. The
/// residual `±1` ambiguity (which flips all frames at once) is fixed by making
/// the leading significant component of the first uncollapsed frame positive.
pub fn normalize(p: &ExtendedPoint) -> Result<ExtendedPoint> {
    let hols: Vec<Su2> = p
        .holonomies()
        .into_iter()
        .chain(p.a.iter().zip(&p.b).flat_map(|(&a, &b)| [a, b]))
        .collect();
    let first = hols
        .iter()
        .position(|h| !h.is_central())
        .ok_or(Error::NotNormalizable("all holonomies are central"))?;
    let g1 = SpherePoint::new(hols[first].vector()).frame_from_north().inverse();
    let mut g2 = None;
    for h in &hols[first + 1..] {
        if h.is_central() {
            continue;
        }
        let v = h.conjugated_by(g1).vector();
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let planar = v[0].hypot(v[1]);
        if planar > 1e-9 * r {
            let phi = v[1].atan2(v[0]);
            g2 = Some(Su2::torus(-phi / (2.0 * PI)));
            break;
        }
    }
    let g2 = g2.ok_or(Error::NotNormalizable("holonomy axes are all parallel (reducible)"))?;
    let mut out = conjugate_point(p, (g2 * g1).normalized());
    if let Some(w) = out.frames.iter().find(|w| !w.is_pole()) {
        let q = w.frame();
        let lead = [q.w, q.x, q.y, q.z].into_iter().find(|c| c.abs() > 1e-6).unwrap_or(1.0);
        if lead < 0.0 {
            out.frames = out.frames.iter().map(|w| w.flipped()).collect();
        }
    }
    Ok(out)
}

/// Moves puncture `i` to the end of `frames[..len]` without changing the product.
fn move_to_end(frames: &mut [WeightedFrame], i: usize) {
    for k in i..frames.len() - 1 {
        let next = frames[k + 1].holonomy();
        let moved = frames[k].left_action(next.inverse());
        frames[k] = frames[k + 1];
        frames[k + 1] = moved;
    }
}

/// Moves puncture `j` to the front without changing the product.
fn move_to_front(frames: &mut [WeightedFrame], j: usize) {
    for k in (1..=j).rev() {
        let prev = frames[k - 1].holonomy();
        let moved = frames[k].left_action(prev);
        frames[k] = frames[k - 1];
        frames[k - 1] = moved;
    }
}

fn check_glue_pair(wi: WeightedFrame, wj: WeightedFrame) -> Result<()> {
    let (ti, tj) = (wi.moment_angle().0, wj.moment_angle().0);
    if (ti - tj).abs() > GLUE_ANGLE_TOL {
        return Err(Error::AngleMismatch(ti, tj));
    }
    for w in [wi, wj] {
        if w.weight() <= WEIGHT_EPS {
            return Err(Error::CentralHolonomy(w.weight()));
        }
    }
    Ok(())
}

/// Glues puncture `i` of `p0` to puncture `j` of `p1` (connected sum).
///
/// The right-hand side is conjugated by `u = q_i 𝕚 q_j⁻¹`, which carries
/// `hol(W_j)` to `hol(W_i)⁻¹`. The glued point lists the right side's handles
/// first and its punctures last; both are recorded as the flow side.
pub fn glue(p0: &ExtendedPoint, i: usize, p1: &ExtendedPoint, j: usize) -> Result<ExtendedPoint> {
    p0.check_puncture(i)?;
    p1.check_puncture(j)?;
    check_glue_pair(p0.frames[i], p1.frames[j])?;

    let mut left = p0.frames.clone();
    move_to_end(&mut left, i);
    let wi = left.pop().expect("nonempty");
    let mut right = p1.frames.clone();
    move_to_front(&mut right, j);
    let wj = right.remove(0);

    let u = (wi.frame() * Su2::I * wj.frame().inverse()).normalized();
    let right: Vec<WeightedFrame> = right.iter().map(|w| w.left_action(u)).collect();

    let (g0, g1) = (p0.signature.genus, p1.signature.genus);
    let a: Vec<Su2> = p1.a.iter().map(|x| x.conjugated_by(u)).chain(p0.a.iter().copied()).collect();
    let b: Vec<Su2> = p1.b.iter().map(|x| x.conjugated_by(u)).chain(p0.b.iter().copied()).collect();
    let n_left = left.len();
    let n_right = right.len();
    let mut frames = left;
    frames.extend(right);

    let signature = SurfaceSignature::new(
        g0 + g1,
        frames.len(),
        p0.signature.twist.times(p1.signature.twist),
    );
    Ok(ExtendedPoint {
        signature,
        a,
        b,
        frames,
        curves: vec![CurveHandle::Separating {
            left_puncture: i,
            right_puncture: j,
            side_b_punctures: (n_left..n_left + n_right).collect(),
            side_b_handles: (0..g1).collect(),
        }],
    })
}

/// Glues punctures `i` and `j` of the same point, adding a handle.
///
/// With `u = q_i 𝕚 q_j⁻¹`, `hol(W_i) hol(W_j) = [hol(W_i), u⁻¹]`; this
/// commutator becomes the new first handle.
pub fn self_glue(p: &ExtendedPoint, i: usize, j: usize) -> Result<ExtendedPoint> {
    p.check_puncture(i)?;
    p.check_puncture(j)?;
    if i == j {
        return Err(Error::InvalidPuncture { index: j, count: p.frames.len() });
    }
    check_glue_pair(p.frames[i], p.frames[j])?;

    let mut frames = p.frames.clone();
    move_to_end(&mut frames, j);
    let wj = frames.pop().expect("nonempty");
    let i_shifted = if i > j { i - 1 } else { i };
    move_to_end(&mut frames, i_shifted);
    let wi = frames.pop().expect("nonempty");

    let u = (wi.frame() * Su2::I * wj.frame().inverse()).normalized();
    let mut a = vec![wi.holonomy()];
    let mut b = vec![u.inverse()];
    a.extend(p.a.iter().copied());
    b.extend(p.b.iter().copied());
    let signature = SurfaceSignature::new(p.signature.genus + 1, frames.len(), p.signature.twist);
    Ok(ExtendedPoint {
        signature,
        a,
        b,
        frames,
        curves: vec![CurveHandle::Handle { handle: 0, first_puncture: i, second_puncture: j }],
    })
}

/// Holonomy along a recorded curve.
pub fn curve_holonomy(p: &ExtendedPoint, curve: usize) -> Result<Su2> {
    let c = p
        .curves
        .get(curve)
        .ok_or(Error::InvalidCurve { index: curve, count: p.curves.len() })?;
    Ok(match c {
        CurveHandle::Separating { side_b_punctures, side_b_handles, .. } => Su2::product(
            side_b_punctures
                .iter()
                .map(|&k| p.frames[k].holonomy())
                .chain(side_b_handles.iter().map(|&k| Su2::commutator(p.a[k], p.b[k]))),
        ),
        CurveHandle::Handle { handle, .. } => p.a[*handle],
    })
}

/// Twist flow along a recorded curve for time `s` (period 2).
///
/// With `H = h exp(t) h⁻¹` the curve holonomy, the flow uses the one-parameter
/// group `Z(s) = h exp(s) h⁻¹` centralizing `H`: it conjugates the far side of a
/// separating curve by `Z(s)`, or replaces `B_k` by `B_k Z(s)` for a handle curve.
pub fn goldman_flow(p: &ExtendedPoint, curve: usize, s: f64) -> Result<ExtendedPoint> {
    let hol = curve_holonomy(p, curve)?;
    let (t, h) = to_alcove(hol);
    let weight = (PI * t.0).sin();
    if weight <= WEIGHT_EPS {
        return Err(Error::CentralHolonomy(weight));
    }
    let z = Su2::torus(s).conjugated_by(h).normalized();
    let mut out = p.clone();
    match &p.curves[curve] {
        CurveHandle::Separating { side_b_punctures, side_b_handles, .. } => {
            for &k in side_b_punctures {
                out.frames[k] = p.frames[k].left_action(z);
            }
            for &k in side_b_handles {
                out.a[k] = p.a[k].conjugated_by(z).normalized();
                out.b[k] = p.b[k].conjugated_by(z).normalized();
            }
        }
        CurveHandle::Handle { handle, .. } => {
            out.b[*handle] = (p.b[*handle] * z).normalized();
        }
    }
    Ok(out)
}

/// Perturbation coordinates: 3 per handle generator, 3 + 1 per frame.
fn perturbed_product(p: &ExtendedPoint, coord: usize, eps: f64) -> Su2 {
    let tangent = |dir: usize| -> Su2 {
        let (s, c) = eps.sin_cos();
        match dir {
            0 => Su2 { w: c, x: s, y: 0.0, z: 0.0 },
            1 => Su2 { w: c, x: 0.0, y: s, z: 0.0 },
            _ => Su2 { w: c, x: 0.0, y: 0.0, z: s },
        }
    };
    let g = p.signature.genus;
    let mut a = p.a.clone();
    let mut b = p.b.clone();
    let mut frame_q: Vec<Su2> = p.frames.iter().map(|w| w.frame()).collect();
    let mut frame_t: Vec<f64> = p.frames.iter().map(|w| w.moment_angle().0).collect();
    if coord < 3 * g {
        a[coord / 3] = a[coord / 3] * tangent(coord % 3);
    } else if coord < 6 * g {
        let c = coord - 3 * g;
        b[c / 3] = b[c / 3] * tangent(c % 3);
    } else {
        let c = coord - 6 * g;
        let (k, dir) = (c / 4, c % 4);
        if dir < 3 {
            frame_q[k] = frame_q[k] * tangent(dir);
        } else {
            frame_t[k] += eps;
        }
    }
    let comms = a.iter().zip(&b).map(|(&a, &b)| Su2::commutator(a, b));
    let hols = frame_q.iter().zip(&frame_t).map(|(&q, &t)| Su2::torus(t).conjugated_by(q));
    Su2::product(comms.chain(hols))
}

/// Numerical rank of the differential of the relation map (3 = surjective).
///
/// Singular values above `10·h` count. Angle coordinates at the ends of the
/// alcove use one-sided differences pointing into `[0,1]`.
pub fn regularity_rank(p: &ExtendedPoint, h: f64) -> usize {
    let g = p.signature.genus;
    let ncoords = 6 * g + 4 * p.frames.len();
    let base_inv = p.relation_product().inverse();
    let tangent_at = |coord: usize, eps: f64| -> [f64; 3] {
        (base_inv * perturbed_product(p, coord, eps)).vector()
    };
    let mut jac = DMatrix::<f64>::zeros(3, ncoords);
    for coord in 0..ncoords {
        let is_angle = coord >= 6 * g && (coord - 6 * g) % 4 == 3;
        let col = if is_angle {
            let t = p.frames[(coord - 6 * g) / 4].moment_angle().0;
            if t - h < 0.0 {
                let f = tangent_at(coord, h);
                [f[0] / h, f[1] / h, f[2] / h]
            } else if t + h > 1.0 {
                let f = tangent_at(coord, -h);
                [-f[0] / h, -f[1] / h, -f[2] / h]
            } else {
                let (f, r) = (tangent_at(coord, h), tangent_at(coord, -h));
                [(f[0] - r[0]) / (2.0 * h), (f[1] - r[1]) / (2.0 * h), (f[2] - r[2]) / (2.0 * h)]
            }
        } else {
            let (f, r) = (tangent_at(coord, h), tangent_at(coord, -h));
            [(f[0] - r[0]) / (2.0 * h), (f[1] - r[1]) / (2.0 * h), (f[2] - r[2]) / (2.0 * h)]
        };
        for (row, v) in col.iter().enumerate() {
            jac[(row, coord)] = *v;
        }
    }
    let gram: Matrix3<f64> = Matrix3::from_fn(|r, c| jac.row(r).dot(&jac.row(c)));
    let eig = gram.symmetric_eigenvalues();
    eig.iter().filter(|&&l| l.max(0.0).sqrt() > 10.0 * h).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trinion(t: [f64; 3]) -> ExtendedPoint {
        crate::trinion::angles_to_rep(crate::trinion::AngleTriple::new(t)).unwrap()
    }

    #[test]
    fn residual_examples() {
        let p = ExtendedPoint::trivial(SurfaceSignature::new(2, 3, Twist::Plus));
        assert_eq!(relation_residual(&p), 0.0);
        let p = ExtendedPoint::trivial(SurfaceSignature::new(1, 0, Twist::Minus));
        assert!((relation_residual(&p) - PI).abs() < 1e-15);
        assert!(relation_residual(&trinion([0.5, 0.5, 0.5])) <= 1e-12);
    }

    #[test]
    fn sampling_examples() {
        let p = sample_point(SurfaceSignature::new(1, 1, Twist::Minus), 11, None).unwrap();
        assert!(relation_residual(&p) <= CONSTRUCTION_TOL);
        let p = sample_point(SurfaceSignature::new(0, 1, Twist::Plus), 3, None).unwrap();
        assert_eq!(p.frames[0], WeightedFrame::NORTH);
        let p = sample_point(SurfaceSignature::new(0, 2, Twist::Plus), 5, Some(&[0.3])).unwrap();
        assert!((p.frames[0].moment_angle().0 - 0.3).abs() < 1e-12);
        assert_eq!(
            sample_point(SurfaceSignature::new(0, 0, Twist::Plus), 1, None),
            Err(Error::EmptySignature)
        );
        for g in 1..4 {
            for tw in [Twist::Plus, Twist::Minus] {
                let p = sample_point(SurfaceSignature::new(g, 0, tw), 9, None).unwrap();
                assert!(relation_residual(&p) <= CONSTRUCTION_TOL, "g={g}");
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let sig = SurfaceSignature::new(2, 3, Twist::Plus);
        assert_eq!(sample_point(sig, 42, None).unwrap(), sample_point(sig, 42, None).unwrap());
    }

    #[test]
    fn center_acts_trivially_on_holonomies() {
        let p = sample_point(SurfaceSignature::new(1, 3, Twist::Plus), 8, None).unwrap();
        let q = conjugate_point(&p, Su2::MINUS_ONE);
        for (x, y) in p.holonomies().iter().zip(q.holonomies()) {
            assert!(x.max_diff(y) < 1e-13);
        }
        assert!(normalize(&q).unwrap().max_diff(&normalize(&p).unwrap()) < 1e-9);
    }

    #[test]
    fn normalize_examples() {
        let p = trinion([0.5, 0.5, 0.5]);
        assert!(normalize(&p).unwrap().max_diff(&p) < 1e-12);
        let abelian = ExtendedPoint::new(
            SurfaceSignature::new(0, 2, Twist::Plus),
            vec![],
            vec![],
            vec![
                WeightedFrame::implode(Su2::ONE, AlcoveAngle(0.3)),
                WeightedFrame::implode(Su2::I, AlcoveAngle(0.3)),
            ],
        )
        .unwrap();
        assert!(matches!(normalize(&abelian), Err(Error::NotNormalizable(_))));
        let central = ExtendedPoint::trivial(SurfaceSignature::trinion());
        assert!(matches!(normalize(&central), Err(Error::NotNormalizable(_))));
    }

    #[test]
    fn glue_two_trinions() {
        let p0 = trinion([0.5, 0.5, 0.5]);
        let p1 = conjugate_point(&trinion([0.3, 0.4, 0.5]), Su2::new(0.3, -0.2, 0.5, 0.7));
        let g = glue(&p0, 2, &p1, 2).unwrap();
        assert_eq!(g.signature, SurfaceSignature::new(0, 4, Twist::Plus));
        assert!(relation_residual(&g) <= MEMBERSHIP_TOL);
        let mismatch = glue(&trinion([0.3, 0.4, 0.5]), 0, &p0, 0);
        assert!(matches!(mismatch, Err(Error::AngleMismatch(..))));
        let central = glue(&trinion([0.0, 0.4, 0.4]), 0, &trinion([0.0, 0.2, 0.2]), 0);
        assert!(matches!(central, Err(Error::CentralHolonomy(_))));
    }

    #[test]
    fn self_glue_adds_a_handle() {
        let p = sample_point(SurfaceSignature::new(0, 3, Twist::Plus), 4, Some(&[0.35, 0.35])).unwrap();
        let g = self_glue(&p, 1, 2).unwrap();
        assert_eq!(g.signature, SurfaceSignature::new(1, 1, Twist::Plus));
        assert!(relation_residual(&g) <= MEMBERSHIP_TOL);
        assert!((to_alcove(g.a[0]).0 .0 - 0.35).abs() < 1e-12);
    }

    #[test]
    fn flow_examples() {
        let p0 = trinion([0.5, 0.5, 0.5]);
        let p1 = trinion([0.3, 0.4, 0.5]);
        let g = glue(&p0, 2, &p1, 2).unwrap();
        assert!(goldman_flow(&g, 0, 0.0).unwrap().max_diff(&g) < 1e-15);
        let back = goldman_flow(&goldman_flow(&g, 0, 0.4).unwrap(), 0, -0.4).unwrap();
        assert!(back.max_diff(&g) < 1e-9);
        let full = goldman_flow(&g, 0, 2.0).unwrap();
        assert!(normalize(&full).unwrap().max_diff(&normalize(&g).unwrap()) < 1e-8);
        assert!(matches!(goldman_flow(&g, 3, 0.1), Err(Error::InvalidCurve { .. })));
    }

    #[test]
    fn rank_examples() {
        let p = sample_point(SurfaceSignature::new(2, 0, Twist::Plus), 21, None).unwrap();
        assert_eq!(regularity_rank(&p, 1e-6), 3);
        let triv = ExtendedPoint::trivial(SurfaceSignature::new(2, 0, Twist::Plus));
        assert!(regularity_rank(&triv, 1e-6) < 3);
        let t = trinion([0.3, 0.4, 0.5]);
        assert_eq!(regularity_rank(&t, 1e-6), 3);
    }

    #[test]
    fn json_round_trip() {
        let p = sample_point(SurfaceSignature::new(1, 2, Twist::Minus), 2, None).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        let q: ExtendedPoint = serde_json::from_str(&s).unwrap();
        assert_eq!(serde_json::to_string(&q).unwrap(), s);
        let bad = s.replace("\"punctures\":2", "\"punctures\":3");
        assert!(serde_json::from_str::<ExtendedPoint>(&bad).is_err());
    }
}
