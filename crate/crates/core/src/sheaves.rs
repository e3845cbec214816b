//! Framed parabolic sheaves on ℙ¹ marked at `z = 0, 1, ∞`.
//!
//! A sheaf is the cokernel of the pencil `A + Bz : O(-2)² → O(-1)⁴`, framed by
//! row vectors `V₁, V₂, V₃` that annihilate the pencil at the three marked
//! points: `V₁A = 0`, `V₂(A+B) = 0`, `V₃B = 0`. The group `SL₂ × SL₄` acts by
//! `(g, G)·(A, B, Vᵢ) = (GAg⁻¹, GBg⁻¹, VᵢG⁻¹)`.

use std::fmt;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4, RowVector2, RowVector4, SMatrix};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type C = Complex64;
pub type Matrix42 = SMatrix<C, 4, 2>;

/// Relative tolerance for the annihilation constraints.
pub const CONSTRAINT_TOL: f64 = 1e-10;
/// Threshold on the scale-normalized invariants.
pub const SEMISTABLE_TOL: f64 = 1e-10;
/// Singular-value cutoff for ranks of scale-normalized data.
pub const RANK_TOL: f64 = 1e-8;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

fn max_abs<'a>(it: impl IntoIterator<Item = &'a C>) -> f64 {
    it.into_iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SheafJson", into = "SheafJson")]
pub struct FramedSheafData {
    a: Matrix42,
    b: Matrix42,
    v: [RowVector4<C>; 3],
}

#[derive(Serialize, Deserialize)]
struct SheafJson {
    #[serde(rename = "A")]
    a: [[C; 2]; 4],
    #[serde(rename = "B")]
    b: [[C; 2]; 4],
    #[serde(rename = "V")]
    v: [[C; 4]; 3],
}

impl From<FramedSheafData> for SheafJson {
    fn from(d: FramedSheafData) -> SheafJson {
        let rows = |m: &Matrix42| std::array::from_fn(|r| [m[(r, 0)], m[(r, 1)]]);
        SheafJson {
            a: rows(&d.a),
            b: rows(&d.b),
            v: std::array::from_fn(|i| std::array::from_fn(|k| d.v[i][k])),
        }
    }
}

impl TryFrom<SheafJson> for FramedSheafData {
    type Error = Error;

    fn try_from(j: SheafJson) -> Result<FramedSheafData> {
        let mat = |rows: [[C; 2]; 4]| Matrix42::from_fn(|r, k| rows[r][k]);
        let v = j.v.map(|row| RowVector4::from_fn(|_, k| row[k]));
        FramedSheafData::new(mat(j.a), mat(j.b), v)
    }
}

impl FramedSheafData {
    /// Rejects data whose constraint residual exceeds [`CONSTRAINT_TOL`].
    pub fn new(a: Matrix42, b: Matrix42, v: [RowVector4<C>; 3]) -> Result<FramedSheafData> {
        let d = FramedSheafData { a, b, v };
        let res = d.constraint_residual();
        if res > CONSTRAINT_TOL {
            return Err(Error::ConstraintViolated(res));
        }
        Ok(d)
    }

    /// Projects each `Vᵢ` onto the left kernel of its constraint matrix and
    /// returns the data with the size of the removed component.
    pub fn projected(a: Matrix42, b: Matrix42, v: [RowVector4<C>; 3]) -> (FramedSheafData, f64) {
        let mats = [a, a + b, b];
        let mut out = v;
        let mut removed: f64 = 0.0;
        for i in 0..3 {
            let m = mats[i];
            let scale = max_abs(m.iter()).max(f64::MIN_POSITIVE);
            let pinv = m.pseudo_inverse(RANK_TOL * scale).expect("nonnegative epsilon");
            let proj = v[i] * m * pinv;
            removed = removed.max(max_abs(proj.iter()));
            out[i] = v[i] - proj;
        }
        (FramedSheafData { a, b, v: out }, removed)
    }

    /// Parses the JSON form, keeping constraint errors distinct from syntax errors.
    pub fn from_json(s: &str) -> Result<FramedSheafData> {
        let raw: SheafJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        raw.try_into()
    }

    pub fn a(&self) -> &Matrix42 {
        &self.a
    }

    pub fn b(&self) -> &Matrix42 {
        &self.b
    }

    pub fn v(&self) -> &[RowVector4<C>; 3] {
        &self.v
    }

    /// `max |VᵢMᵢ| / (max|Vᵢ| · max|Mᵢ|)` over the three constraints.
    pub fn constraint_residual(&self) -> f64 {
        let mats = [self.a, self.a + self.b, self.b];
        (0..3)
            .map(|i| {
                let den = max_abs(self.v[i].iter()) * max_abs(mats[i].iter());
                if den == 0.0 {
                    0.0
                } else {
                    max_abs((self.v[i] * mats[i]).iter()) / den
                }
            })
            .fold(0.0, f64::max)
    }

    /// `(A, B)` jointly and each `Vᵢ` separately scaled to max entry modulus 1.
    pub fn scale_normalized(&self) -> FramedSheafData {
        let s = max_abs(self.a.iter().chain(self.b.iter()));
        let inv = if s > 0.0 { 1.0 / s } else { 1.0 };
        let v = self.v.map(|row| {
            let t = max_abs(row.iter());
            if t > 0.0 {
                row / c(t)
            } else {
                row
            }
        });
        FramedSheafData { a: self.a * c(inv), b: self.b * c(inv), v }
    }

    /// `(GAg⁻¹, GBg⁻¹, VᵢG⁻¹)`; `None` if either matrix is singular.
    pub fn act(&self, g: &Matrix2<C>, big: &Matrix4<C>) -> Option<FramedSheafData> {
        let gi = g.try_inverse()?;
        let bi = big.try_inverse()?;
        Some(FramedSheafData {
            a: big * self.a * gi,
            b: big * self.b * gi,
            v: self.v.map(|row| row * bi),
        })
    }

    /// The 4×4 block `[A | B]`.
    pub fn block(&self) -> Matrix4<C> {
        Matrix4::from_fn(|r, k| if k < 2 { self.a[(r, k)] } else { self.b[(r, k - 2)] })
    }

    fn max_entry(&self) -> f64 {
        max_abs(self.a.iter().chain(self.b.iter()).chain(self.v.iter().flat_map(|r| r.iter())))
    }
}

fn det2(r1: RowVector2<C>, r2: RowVector2<C>) -> C {
    r1[0] * r2[1] - r1[1] * r2[0]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InvariantQuadruple(pub [C; 4]);

impl InvariantQuadruple {
    pub fn max_modulus(&self) -> f64 {
        max_abs(self.0.iter())
    }
}

fn raw_invariants(d: &FramedSheafData) -> InvariantQuadruple {
    let v1b = d.v[0] * d.b;
    let v2a = d.v[1] * d.a;
    let v3a = d.v[2] * d.a;
    InvariantQuadruple([d.block().determinant(), det2(v1b, v2a), det2(v1b, v3a), det2(v2a, v3a)])
}

/// `(det[A|B], det(V₁B; V₂A), det(V₁B; V₃A), det(V₂A; V₃A))`.
pub fn invariants(d: &FramedSheafData) -> Result<InvariantQuadruple> {
    let res = d.constraint_residual();
    if res > CONSTRAINT_TOL {
        return Err(Error::ConstraintViolated(res));
    }
    Ok(raw_invariants(d))
}

pub fn is_semistable(d: &FramedSheafData) -> Result<bool> {
    invariants(d)?;
    Ok(raw_invariants(&d.scale_normalized()).max_modulus() > SEMISTABLE_TOL)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SheafCase {
    I,
    Ii,
    Iii,
    Iv,
}

impl fmt::Display for SheafCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SheafCase::I => "i",
            SheafCase::Ii => "ii",
            SheafCase::Iii => "iii",
            SheafCase::Iv => "iv",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MarkedPoint {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "inf")]
    Infinity,
}

impl fmt::Display for MarkedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MarkedPoint::Zero => "0",
            MarkedPoint::One => "1",
            MarkedPoint::Infinity => "∞",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SheafType {
    #[serde(rename = "O+O")]
    Trivial,
    #[serde(rename = "O(-1)+O(1)")]
    Split,
    #[serde(rename = "O+O(-1)+C_p")]
    OneTorsion,
    #[serde(rename = "O(-1)+O(-1)+C_p+C_q")]
    TwoTorsion,
}

impl fmt::Display for SheafType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SheafType::Trivial => "O⊕O",
            SheafType::Split => "O(-1)⊕O(1)",
            SheafType::OneTorsion => "O⊕O(-1)⊕C_p",
            SheafType::TwoTorsion => "O(-1)⊕O(-1)⊕C_p⊕C_q",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub case: SheafCase,
    pub torsion: Vec<MarkedPoint>,
    pub sheaf_type: SheafType,
}

fn rank42(m: &Matrix42) -> usize {
    m.singular_values().iter().filter(|&&s| s > RANK_TOL).count()
}

fn rank4(m: &Matrix4<C>) -> usize {
    m.singular_values().iter().filter(|&&s| s > RANK_TOL).count()
}

/// Coefficients `(c₀, c₁, c₂)` of the six 2×2 minors of `A + Bz`.
fn minor_polynomials(a: &Matrix42, b: &Matrix42) -> Vec<[C; 3]> {
    let mut out = Vec::with_capacity(6);
    for r in 0..4 {
        for s in r + 1..4 {
            let c0 = a[(r, 0)] * a[(s, 1)] - a[(r, 1)] * a[(s, 0)];
            let c1 = a[(r, 0)] * b[(s, 1)] + b[(r, 0)] * a[(s, 1)] - a[(r, 1)] * b[(s, 0)] - b[(r, 1)] * a[(s, 0)];
            let c2 = b[(r, 0)] * b[(s, 1)] - b[(r, 1)] * b[(s, 0)];
            out.push([c0, c1, c2]);
        }
    }
    out
}

/// Finite points where the pencil drops rank, as roots of the minors.
fn pencil_degeneracies(a: &Matrix42, b: &Matrix42) -> Result<Vec<C>> {
    let polys = minor_polynomials(a, b);
    let size = |p: &[C; 3]| max_abs(p.iter());
    let lead = polys
        .iter()
        .copied()
        .max_by(|p, q| size(p).total_cmp(&size(q)))
        .expect("six minors");
    if size(&lead) <= RANK_TOL {
        return Err(Error::NonMarkedDegeneration("every z".into()));
    }
    let tol = RANK_TOL * size(&lead);
    let roots: Vec<C> = if lead[2].norm() > tol {
        let disc = (lead[1] * lead[1] - c(4.0) * lead[2] * lead[0]).sqrt();
        vec![(-lead[1] + disc) / (c(2.0) * lead[2]), (-lead[1] - disc) / (c(2.0) * lead[2])]
    } else if lead[1].norm() > tol {
        vec![-lead[0] / lead[1]]
    } else {
        vec![]
    };
    let eval = |p: &[C; 3], z: C| p[0] + p[1] * z + p[2] * z * z;
    Ok(roots
        .into_iter()
        .filter(|&z| {
            let scale = 1.0 + z.norm_sqr();
            polys.iter().all(|p| eval(p, z).norm() <= 1e-6 * scale * size(&lead).max(1.0))
        })
        .collect())
}

pub fn classify(d: &FramedSheafData) -> Result<Classification> {
    if !is_semistable(d)? {
        return Err(Error::Unstable);
    }
    let n = d.scale_normalized();
    if raw_invariants(&n).0[0].norm() > SEMISTABLE_TOL {
        return Ok(Classification { case: SheafCase::I, torsion: vec![], sheaf_type: SheafType::Trivial });
    }
    for z in pencil_degeneracies(&n.a, &n.b)? {
        if z.norm() > 1e-6 && (z - c(1.0)).norm() > 1e-6 {
            return Err(Error::NonMarkedDegeneration(format!("{z}")));
        }
    }
    let mut torsion = Vec::new();
    for (pt, m) in [(MarkedPoint::Zero, n.a), (MarkedPoint::One, n.a + n.b), (MarkedPoint::Infinity, n.b)] {
        if rank42(&m) < 2 {
            torsion.push(pt);
        }
    }
    match rank4(&n.block()) {
        3 if torsion.is_empty() => Ok(Classification { case: SheafCase::Ii, torsion, sheaf_type: SheafType::Split }),
        3 => Ok(Classification { case: SheafCase::Iii, torsion, sheaf_type: SheafType::OneTorsion }),
        2 => Ok(Classification { case: SheafCase::Iv, torsion, sheaf_type: SheafType::TwoTorsion }),
        _ => Err(Error::Unstable),
    }
}

/// Homogeneous coordinates on ℙ³.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProjectivePoint(pub [C; 4]);

impl ProjectivePoint {
    /// Rescales so that the first entry of maximal modulus equals 1.
    pub fn normalized(self) -> ProjectivePoint {
        let m = max_abs(self.0.iter());
        if m == 0.0 {
            return self;
        }
        let pivot = self.0.iter().copied().find(|z| z.norm() >= m * (1.0 - 1e-9)).expect("max entry");
        ProjectivePoint(self.0.map(|z| z / pivot))
    }

    /// Sine of the angle between the two lines, `|x ∧ y| / |x||y|`.
    pub fn distance(&self, o: &ProjectivePoint) -> f64 {
        let (x, y) = (&self.0, &o.0);
        let mut wedge = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                wedge += (x[i] * y[j] - x[j] * y[i]).norm_sqr();
            }
        }
        let nx: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        let ny: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        (wedge / (nx * ny)).sqrt()
    }
}

fn fmt_real(x: f64) -> String {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

fn fmt_complex(z: C) -> String {
    if z.im.abs() <= 1e-12 * z.re.abs().max(1.0) {
        fmt_real(z.re)
    } else if z.re.abs() <= 1e-12 * z.im.abs().max(1.0) {
        format!("{}i", fmt_real(z.im))
    } else {
        let sign = if z.im < 0.0 { '-' } else { '+' };
        format!("{}{}{}i", fmt_real(z.re), sign, fmt_real(z.im.abs()))
    }
}

impl fmt::Display for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|&z| fmt_complex(z)).collect();
        write!(f, "[{}]", parts.join(":"))
    }
}

pub fn to_p3(d: &FramedSheafData) -> Result<ProjectivePoint> {
    if !is_semistable(d)? {
        return Err(Error::Unstable);
    }
    Ok(ProjectivePoint(raw_invariants(d).0).normalized())
}

/// One-parameter subgroup `z ↦ (h·diag(z^{-m}, z^m)·h⁻¹, P·diag(z^{p})·P⁻¹)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DestabilizingWitness {
    pub m: i32,
    pub weights: [i32; 4],
    #[serde(skip)]
    pub small_basis: Matrix2<C>,
    #[serde(skip)]
    pub big_basis: Matrix4<C>,
}

impl DestabilizingWitness {
    fn canonical() -> DestabilizingWitness {
        DestabilizingWitness {
            m: 2,
            weights: [-1, -1, -1, 3],
            small_basis: Matrix2::identity(),
            big_basis: Matrix4::identity(),
        }
    }

    pub fn group_element(&self, z: f64) -> (Matrix2<C>, Matrix4<C>) {
        let h = self.small_basis;
        let p = self.big_basis;
        let dm = Matrix2::from_diagonal(&nalgebra::Vector2::new(c(z.powi(-self.m)), c(z.powi(self.m))));
        let dp = Matrix4::from_diagonal(&nalgebra::Vector4::from_fn(|r, _| c(z.powi(self.weights[r]))));
        let hi = h.try_inverse().expect("basis");
        let pi = p.try_inverse().expect("basis");
        (h * dm * hi, p * dp * pi)
    }

    /// Max entry of the orbit point at `z`, in the adapted bases, after
    /// discarding entries that are zero at rank tolerance.
    pub fn orbit_norm(&self, d: &FramedSheafData, z: f64) -> f64 {
        let (a, b, v) = self.adapted(&d.scale_normalized());
        let keep = |x: C| if x.norm() > RANK_TOL { x.norm() } else { 0.0 };
        let mut out: f64 = 0.0;
        for r in 0..4 {
            for (k, mk) in [-self.m, self.m].into_iter().enumerate() {
                let e = self.weights[r] - mk;
                out = out.max((keep(a[(r, k)]) + keep(b[(r, k)])) * z.powi(e));
            }
            for row in &v {
                out = out.max(keep(row[r]) * z.powi(-self.weights[r]));
            }
        }
        out
    }

    /// Smallest exponent of `z` over the nonzero adapted entries.
    pub fn min_exponent(&self, d: &FramedSheafData) -> Option<i32> {
        let (a, b, v) = self.adapted(&d.scale_normalized());
        let mut out: Option<i32> = None;
        let mut see = |x: C, e: i32| {
            if x.norm() > RANK_TOL {
                out = Some(out.map_or(e, |o| o.min(e)));
            }
        };
        for r in 0..4 {
            for (k, mk) in [-self.m, self.m].into_iter().enumerate() {
                see(a[(r, k)], self.weights[r] - mk);
                see(b[(r, k)], self.weights[r] - mk);
            }
            for row in &v {
                see(row[r], -self.weights[r]);
            }
        }
        out
    }

    fn adapted(&self, d: &FramedSheafData) -> (Matrix42, Matrix42, [RowVector4<C>; 3]) {
        let pi = self.big_basis.try_inverse().expect("basis");
        let h = self.small_basis;
        (pi * d.a * h, pi * d.b * h, d.v.map(|row| row * self.big_basis))
    }
}

fn hcat(parts: &[&DMatrix<C>]) -> DMatrix<C> {
    let cols: Vec<_> = parts.iter().flat_map(|m| m.column_iter().map(|c| c.into_owned())).collect();
    if cols.is_empty() {
        DMatrix::zeros(4, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormal basis of the column span.
fn span(m: &DMatrix<C>) -> DMatrix<C> {
    // pivoted Gram-Schmidt, reorthogonalized
    let mut rest: Vec<DVector<C>> = m.column_iter().map(|c| c.into_owned()).collect();
    let mut basis: Vec<DVector<C>> = Vec::new();
    while let Some((i, norm)) = rest
        .iter()
        .map(|c| c.norm())
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
    {
        if norm <= RANK_TOL || basis.len() == m.nrows() {
            break;
        }
        let q = rest.swap_remove(i) / c(norm);
        for col in rest.iter_mut() {
            for _ in 0..2 {
                let proj = q.dotc(col);
                *col -= &q * proj;
            }
        }
        basis.push(q);
    }
    if basis.is_empty() {
        DMatrix::zeros(m.nrows(), 0)
    } else {
        DMatrix::from_columns(&basis)
    }
}

/// Orthonormal basis of the part of `big` orthogonal to `small`.
fn relative_complement(big: &DMatrix<C>, small: &DMatrix<C>) -> DMatrix<C> {
    let proj = DMatrix::<C>::identity(4, 4) - small * small.adjoint();
    span(&(proj * big))
}

fn complement(sub: &DMatrix<C>) -> DMatrix<C> {
    relative_complement(&DMatrix::identity(4, 4), sub)
}

fn intersection(s: &DMatrix<C>, u: &DMatrix<C>) -> DMatrix<C> {
    complement(&span(&hcat(&[&complement(s), &complement(u)])))
}

/// A one-parameter subgroup driving `d` to zero, or `None` when `d` is semistable.
pub fn destabilizing_witness(d: &FramedSheafData) -> Option<DestabilizingWitness> {
    if is_semistable(d).unwrap_or(true) {
        return None;
    }
    let n = d.scale_normalized();
    if n.max_entry() == 0.0 {
        return Some(DestabilizingWitness::canonical());
    }
    // common kernel vector of the rows VᵢA, VᵢB
    let rows = DMatrix::<C>::from_fn(6, 2, |r, k| {
        let (i, m) = (r / 2, if r % 2 == 0 { n.a } else { n.b });
        (n.v[i] * m)[k]
    });
    let top = (0..6)
        .max_by(|&i, &j| rows.row(i).norm().total_cmp(&rows.row(j).norm()))
        .expect("six rows");
    let r = rows.row(top);
    let k = if r.norm() > RANK_TOL {
        nalgebra::Vector2::new(-r[1], r[0]) / c(r.norm())
    } else {
        nalgebra::Vector2::new(c(0.0), c(1.0))
    };
    let kp = nalgebra::Vector2::new(-k[1].conj(), k[0].conj());
    let h = Matrix2::from_columns(&[kp, k]);

    let to_d = |m: &Matrix42| DMatrix::from_fn(4, 2, |r, k| m[(r, k)]);
    let col2 = to_d(&(n.a * h)).column(1).into_owned();
    let col2b = to_d(&(n.b * h)).column(1).into_owned();
    let w2 = span(&DMatrix::from_columns(&[col2, col2b]));
    let vmat = DMatrix::from_fn(3, 4, |i, k| n.v[i][k]);
    let s_perp = complement(&span(&vmat.adjoint()));
    let u = span(&DMatrix::from_fn(4, 4, |r, k| n.block()[(r, k)]));
    let common = intersection(&s_perp, &u);
    let x = relative_complement(&common, &w2);
    let y = relative_complement(&s_perp, &common);
    let z = relative_complement(&u, &common);
    let rest = complement(&span(&hcat(&[&s_perp, &u])));
    let p = hcat(&[&w2, &x, &y, &z, &rest]);
    if p.ncols() != 4 {
        return Some(DestabilizingWitness::canonical());
    }
    let m = 2;
    let mut weights = Vec::with_capacity(4);
    weights.extend(std::iter::repeat_n(m + 1, w2.ncols()));
    weights.extend(std::iter::repeat_n(1 - m, x.ncols()));
    let y_start = weights.len();
    weights.extend(std::iter::repeat_n(0, y.ncols()));
    weights.extend(std::iter::repeat_n(-1, z.ncols()));
    let r_start = weights.len();
    weights.extend(std::iter::repeat_n(-1, rest.ncols()));
    let total: i32 = weights.iter().sum();
    if total > 0 {
        if rest.ncols() > 0 {
            weights[r_start] -= total;
        } else if y.ncols() > 0 {
            weights[y_start] -= total;
        }
    } else if total < 0 {
        let slot = if y.ncols() > 0 { y_start } else { 0 };
        weights[slot] -= total;
    }
    Some(DestabilizingWitness {
        m,
        weights: [weights[0], weights[1], weights[2], weights[3]],
        small_basis: h,
        big_basis: Matrix4::from_fn(|r, k| p[(r, k)]),
    })
}

/// Subsheaf data entering the weighted stability inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsheafDescriptor {
    pub degree: i32,
    pub rank: u8,
    pub mu: Vec<u8>,
    pub whole: bool,
}

impl SubsheafDescriptor {
    pub fn new(degree: i32, rank: u8, mu: Vec<u8>, whole: bool) -> Result<SubsheafDescriptor> {
        if !(1..=2).contains(&rank) {
            return Err(Error::InvalidSubsheaf(format!("rank {rank} not in {{1,2}}")));
        }
        if mu.iter().any(|&m| m > 1) {
            return Err(Error::InvalidSubsheaf("framing indicators must be 0 or 1".into()));
        }
        if whole && (rank != 2 || degree != 0) {
            return Err(Error::InvalidSubsheaf("the whole sheaf has rank 2 and degree 0".into()));
        }
        Ok(SubsheafDescriptor { degree, rank, mu, whole })
    }
}

/// `2 deg F  <  Σᵢ γᵢ (2 − rk F − 2μᵢ + σᵢ)` (or `≤` when not strict), with
/// `σᵢ = 1/2` for the whole sheaf and 0 otherwise.
pub fn stability_inequality(s: &SubsheafDescriptor, gamma: &[f64], strict: bool) -> bool {
    let sigma = if s.whole { 0.5 } else { 0.0 };
    let lhs = 2.0 * s.degree as f64;
    let rhs: f64 = gamma
        .iter()
        .zip(&s.mu)
        .map(|(g, &mu)| g * (2.0 - s.rank as f64 - 2.0 * mu as f64 + sigma))
        .sum();
    if strict {
        lhs < rhs
    } else {
        lhs <= rhs
    }
}

fn mat42(rows: [[f64; 2]; 4]) -> Matrix42 {
    Matrix42::from_fn(|r, k| c(rows[r][k]))
}

fn row(x: [C; 4]) -> RowVector4<C> {
    RowVector4::from_fn(|_, k| x[k])
}

/// Normal form with `det[A|B] ≠ 0`; `p = (a, b, c, d, e, f)`.
pub fn normal_form_i(p: [C; 6]) -> FramedSheafData {
    let z = c(0.0);
    let [a, b, cc, d, e, f] = p;
    FramedSheafData {
        a: mat42([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0], [0.0, 0.0]]),
        b: mat42([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
        v: [row([z, z, a, b]), row([cc, d, -cc, -d]), row([e, f, z, z])],
    }
}

/// Three-dimensional span, injective pencil; `p = (a, b, c, d, e, f)`.
pub fn normal_form_ii(p: [C; 6]) -> FramedSheafData {
    let z = c(0.0);
    let [a, b, cc, d, e, f] = p;
    FramedSheafData {
        a: mat42([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0], [0.0, 0.0]]),
        b: mat42([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]),
        v: [row([z, z, a, b]), row([cc, -cc, cc, d]), row([e, z, z, f])],
    }
}

/// Three-dimensional span, torsion at `z = 0`; `p = (a, b, c, d, e, f, g)`.
pub fn normal_form_iii(p: [C; 7]) -> FramedSheafData {
    let z = c(0.0);
    let [a, b, cc, d, e, f, g] = p;
    FramedSheafData {
        a: mat42([[0.0, 1.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]),
        b: mat42([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]),
        v: [row([z, a, b, g]), row([cc, z, -cc, d]), row([e, z, z, f])],
    }
}

/// Two-dimensional span, torsion at `z = 0, ∞`; `p = (a, b, c, d, e, f, g, h)`.
pub fn normal_form_iv(p: [C; 8]) -> FramedSheafData {
    let z = c(0.0);
    let [a, b, cc, d, e, f, g, h] = p;
    FramedSheafData {
        a: mat42([[0.0, 1.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]),
        b: mat42([[0.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.0, 0.0]]),
        v: [row([z, a, b, cc]), row([z, z, d, e]), row([f, z, g, h])],
    }
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> C {
    C::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// A random element of `SL₂ × SL₄` near the identity (well conditioned).
pub fn random_group_element<R: Rng + ?Sized>(rng: &mut R) -> (Matrix2<C>, Matrix4<C>) {
    let g = Matrix2::identity() + Matrix2::from_fn(|_, _| random_complex(rng) * c(0.4));
    let big = Matrix4::identity() + Matrix4::from_fn(|_, _| random_complex(rng) * c(0.3));
    let g = g / g.determinant().powf(0.5);
    let big = big / big.determinant().powf(0.25);
    (g, big)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn re<const N: usize>(x: [f64; N]) -> [C; N] {
        x.map(c)
    }

    fn close(x: &InvariantQuadruple, y: [f64; 4]) -> bool {
        x.0.iter().zip(y).all(|(a, b)| (a - c(b)).norm() < 1e-12)
    }

    #[test]
    fn invariant_examples() {
        let d = normal_form_i(re([1.0, 0.0, 0.0, 1.0, 1.0, 1.0]));
        assert!(close(&invariants(&d).unwrap(), [1.0, 1.0, 1.0, -1.0]));
        let d = normal_form_ii(re([1.0, 0.0, 1.0, 0.0, 1.0, 0.0]));
        assert!(close(&invariants(&d).unwrap(), [0.0, -1.0, -1.0, 1.0]));
        let d = normal_form_i([c(0.0); 6]);
        assert!(close(&invariants(&d).unwrap(), [1.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn constraint_rejection() {
        let d = normal_form_i(re([1.0, 0.0, 0.0, 1.0, 1.0, 1.0]));
        let mut v = d.v;
        v[0][0] = c(1.0);
        assert!(matches!(FramedSheafData::new(d.a, d.b, v), Err(Error::ConstraintViolated(_))));
        let (p, removed) = FramedSheafData::projected(d.a, d.b, v);
        assert!(removed > 0.5);
        assert!(p.constraint_residual() < 1e-14);
    }

    #[test]
    fn semistability_examples() {
        assert!(is_semistable(&normal_form_i(re([1.0, 0.0, 0.0, 1.0, 1.0, 1.0]))).unwrap());
        assert!(is_semistable(&normal_form_i([c(0.0); 6])).unwrap());
        // all VᵢA, VᵢB along (∗, 0), span three-dimensional
        let a = mat42([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.5, 1.0]]);
        let b = mat42([[0.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.0, 2.0]]);
        let z = c(0.0);
        let v = [row([z, c(1.0), c(1.0), z]), row([z, z, c(1.0), z]), row([c(1.0), z, c(2.0), z])];
        let d = FramedSheafData::new(a, b, v).unwrap();
        assert!(!is_semistable(&d).unwrap());
        let w = destabilizing_witness(&d).unwrap();
        assert_eq!(w.m, 2);
        let mut p = w.weights;
        p.sort();
        assert_eq!(p, [-1, -1, -1, 3]);
        assert!(w.min_exponent(&d).unwrap() > 0);
        let norms: Vec<f64> = (1..6).map(|j| w.orbit_norm(&d, 10f64.powi(-j))).collect();
        assert!(norms.windows(2).all(|p| p[1] < p[0]) && norms[4] < 1e-4);
    }

    #[test]
    fn witness_edge_cases() {
        assert!(destabilizing_witness(&normal_form_i(re([1.0, 0.0, 0.0, 1.0, 1.0, 1.0]))).is_none());
        let zero = FramedSheafData::new(Matrix42::zeros(), Matrix42::zeros(), [RowVector4::zeros(); 3]).unwrap();
        let w = destabilizing_witness(&zero).unwrap();
        assert_eq!((w.m, w.weights), (2, [-1, -1, -1, 3]));
    }

    #[test]
    fn classify_normal_forms() {
        let d = normal_form_i(re([1.0, 0.0, 0.0, 1.0, 1.0, 1.0]));
        let k = classify(&d).unwrap();
        assert_eq!((k.case, k.sheaf_type), (SheafCase::I, SheafType::Trivial));
        assert!(k.torsion.is_empty());
        assert_eq!(to_p3(&d).unwrap().to_string(), "[1:1:1:-1]");

        let k = classify(&normal_form_ii(re([1.0, 0.0, 1.0, 0.0, 1.0, 0.0]))).unwrap();
        assert_eq!((k.case, k.sheaf_type), (SheafCase::Ii, SheafType::Split));

        let d = normal_form_iii(re([1.0, 0.3, 1.0, -0.7, 1.0, 0.2, 1.1]));
        let k = classify(&d).unwrap();
        assert_eq!((k.case, k.torsion), (SheafCase::Iii, vec![MarkedPoint::Zero]));

        let d = normal_form_iv(re([1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]));
        let k = classify(&d).unwrap();
        assert_eq!(k.case, SheafCase::Iv);
        assert_eq!(k.torsion, vec![MarkedPoint::Zero, MarkedPoint::Infinity]);
        assert_eq!(to_p3(&d).unwrap().to_string(), "[0:0:1:0]");
    }

    #[test]
    fn unstable_data_is_rejected() {
        let d = normal_form_ii(re([0.0, 1.0, 0.0, 1.0, 0.0, 1.0]));
        assert_eq!(classify(&d), Err(Error::Unstable));
        assert_eq!(to_p3(&d), Err(Error::Unstable));
    }

    #[test]
    fn group_action_preserves_constraints_and_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = normal_form_ii(std::array::from_fn(|_| random_complex(&mut rng)));
        let p0 = to_p3(&d).unwrap();
        for _ in 0..20 {
            let (g, big) = random_group_element(&mut rng);
            let e = d.act(&g, &big).unwrap();
            assert!(e.constraint_residual() < 1e-12);
            assert!(to_p3(&e).unwrap().distance(&p0) < 1e-9);
            assert_eq!(classify(&e).unwrap().case, SheafCase::Ii);
        }
    }

    #[test]
    fn stability_inequality_examples() {
        let whole = SubsheafDescriptor::new(0, 2, vec![0, 0, 0], true).unwrap();
        assert!(stability_inequality(&whole, &[0.3, 0.2, 0.9], false));
        let framed = SubsheafDescriptor::new(0, 2, vec![1, 0, 0], true).unwrap();
        assert!(!stability_inequality(&framed, &[0.4, 0.0, 0.0], true));
        assert!(stability_inequality(&framed, &[0.0, 0.0, 0.0], false));
        let line = SubsheafDescriptor::new(0, 1, vec![0, 1, 1], false).unwrap();
        assert!(stability_inequality(&line, &[0.8, 0.3, 0.2], true));
        assert!(!stability_inequality(&line, &[0.4, 0.3, 0.2], true));
        assert!(SubsheafDescriptor::new(1, 2, vec![], true).is_err());
    }

    #[test]
    fn json_round_trip() {
        let d = normal_form_iii(re([1.0, 0.5, 2.0, 0.0, -1.0, 0.25, 3.0]));
        let s = serde_json::to_string(&d).unwrap();
        assert!(s.starts_with(r#"{"A":[[[0.0,0.0],[1.0,0.0]]"#));
        let back: FramedSheafData = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
        let bad = s.replacen("[[0.0,0.0],[1.0,0.0]]", "[[1.0,0.0],[1.0,0.0]]", 1);
        assert!(serde_json::from_str::<FramedSheafData>(&bad).is_err());
    }
}
