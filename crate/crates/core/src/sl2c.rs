//! `SL(2,C) = SU(2) ⋈ K` in matrix form.
//!
//! `K` is the group of lower-triangular matrices
//! `(1/√(1+c)) [[1+c, 0], [a+ib, 1]]`, `c > −1`. Every `M ∈ SL(2,C)` factors
//! uniquely as `M = A·B` with `A ∈ SU(2)`, `B ∈ K`; the mutual group actions
//! are read off by refactoring `h·g`. At the algebra level the action tensors
//! are derived by projecting matrix commutators onto the embedded bases.

use std::fmt;

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::audit::FormulaSet;
use crate::error::{Error, Result};
use crate::lie::{levi_civita, numbered, LieAlgebra};
use crate::matched_pair::{DoubleVector, DualPoint, MatchedPair};
use crate::rng::{normal, SeededRng};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A 2×2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2C(pub Matrix2<Complex64>);

impl Mat2C {
    pub fn new(a11: Complex64, a12: Complex64, a21: Complex64, a22: Complex64) -> Self {
        Self(Matrix2::new(a11, a12, a21, a22))
    }

    /// From row-major `[re, im]` pairs.
    pub fn from_pairs(rows: [[[f64; 2]; 2]; 2]) -> Self {
        let e = |r: usize, col: usize| c(rows[r][col][0], rows[r][col][1]);
        Self::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    pub fn to_pairs(&self) -> [[[f64; 2]; 2]; 2] {
        let e = |r: usize, col: usize| [self.0[(r, col)].re, self.0[(r, col)].im];
        [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
    }

    pub fn identity() -> Self {
        Self(Matrix2::identity())
    }

    pub fn entry(&self, r: usize, col: usize) -> Complex64 {
        self.0[(r, col)]
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self(self.0 * other.0)
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn det(&self) -> Complex64 {
        self.0[(0, 0)] * self.0[(1, 1)] - self.0[(0, 1)] * self.0[(1, 0)]
    }

    /// Inverse of a unimodular-ish matrix via the adjugate.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        let m = &self.0;
        Some(Self::new(
            m[(1, 1)] / d,
            -m[(0, 1)] / d,
            -m[(1, 0)] / d,
            m[(0, 0)] / d,
        ))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self(self.0 * other.0 - other.0 * self.0)
    }

    /// Largest entry modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.0 - other.0)
            .iter()
            .fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.is_finite())
    }

    /// Real coordinates `(Re a11, Re a12, Re a21, Re a22, Im a11, ..., Im a22)`.
    fn real_coords(&self) -> [f64; 8] {
        let m = &self.0;
        [
            m[(0, 0)].re,
            m[(0, 1)].re,
            m[(1, 0)].re,
            m[(1, 1)].re,
            m[(0, 0)].im,
            m[(0, 1)].im,
            m[(1, 0)].im,
            m[(1, 1)].im,
        ]
    }
}

impl fmt::Display for Mat2C {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.to_pairs();
        write!(
            f,
            "[[({:.12}, {:.12}), ({:.12}, {:.12})], [({:.12}, {:.12}), ({:.12}, {:.12})]]",
            p[0][0][0],
            p[0][0][1],
            p[0][1][0],
            p[0][1][1],
            p[1][0][0],
            p[1][0][1],
            p[1][1][0],
            p[1][1][1]
        )
    }
}

/// An element of `SU(2)`: `[[ω, ϑ], [−ϑ̄, ω̄]]`, `|ω|² + |ϑ|² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SU2Element(Mat2C);

impl SU2Element {
    pub const TOLERANCE: f64 = 1e-12;

    /// Accepts `m` when `m†m = I` and `det m = 1` to `1e-12`.
    pub fn new(m: Mat2C) -> Result<Self> {
        let unitary = m.adjoint().mul(&m).max_abs_diff(&Mat2C::identity());
        let det = (m.det() - 1.0).norm();
        if !(unitary <= Self::TOLERANCE && det <= Self::TOLERANCE) {
            return Err(Error::Validation(format!(
                "not in SU(2): |M†M − I| = {unitary:e}, |det − 1| = {det:e}"
            )));
        }
        Ok(Self(m))
    }

    pub fn identity() -> Self {
        Self(Mat2C::identity())
    }

    /// Normalizes two normal draws into the first column and completes it
    /// with its symplectic orthogonal.
    pub fn random(rng: &mut SeededRng) -> Self {
        loop {
            let omega = c(normal(rng), normal(rng));
            let theta = c(normal(rng), normal(rng));
            let norm = (omega.norm_sqr() + theta.norm_sqr()).sqrt();
            if norm < 1e-8 {
                continue;
            }
            let (omega, theta) = (omega / norm, theta / norm);
            return Self(Mat2C::new(omega, theta, -theta.conj(), omega.conj()));
        }
    }

    pub fn matrix(&self) -> &Mat2C {
        &self.0
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self(self.0.mul(&other.0))
    }
}

/// An element `(a, b, c)` of `K`, `c > −1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KElement {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl KElement {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::Input("K element must be finite".into()));
        }
        if c <= -1.0 {
            return Err(Error::Input(format!("K element needs c > -1, got {c}")));
        }
        Ok(Self { a, b, c })
    }

    pub fn identity() -> Self {
        Self {
            a: 0.0,
            b: 0.0,
            c: 0.0,
        }
    }

    pub fn random(rng: &mut SeededRng) -> Self {
        let a = normal(rng);
        let b = normal(rng);
        let c = (0.5 * normal(rng)).exp() - 1.0;
        Self { a, b, c }
    }

    /// `(1/√(1+c)) [[1+c, 0], [a+ib, 1]]`.
    pub fn to_matrix(&self) -> Mat2C {
        let s = 1.0 / (1.0 + self.c).sqrt();
        Mat2C::new(
            c((1.0 + self.c) * s, 0.0),
            c(0.0, 0.0),
            c(self.a * s, self.b * s),
            c(s, 0.0),
        )
    }

    /// `(a1,b1,c1) ∗ (a2,b2,c2) = (a1,b1,c1)(1 + c2) + (a2,b2,c2)`.
    pub fn multiply(&self, other: &Self) -> Self {
        let s = 1.0 + other.c;
        let out = Self {
            a: self.a * s + other.a,
            b: self.b * s + other.b,
            c: self.c * s + other.c,
        };
        // 1 + c = (1 + c1)(1 + c2) > 0
        debug_assert!(out.c > -1.0);
        out
    }

    pub fn inverse(&self) -> Self {
        let s = 1.0 + self.c;
        Self {
            a: -self.a / s,
            b: -self.b / s,
            c: -self.c / s,
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.a - other.a)
            .abs()
            .max((self.b - other.b).abs())
            .max((self.c - other.c).abs())
    }
}

/// Factors `M = A · B` with `A ∈ SU(2)`, `B ∈ K`.
///
/// With `P = M†M = B†B`: `c = 1/P₂₂ − 1` and `a + ib = P₂₁/P₂₂`, then
/// `A = M · B⁻¹`.
pub fn iwasawa_factor(m: &Mat2C) -> Result<(SU2Element, KElement)> {
    if !m.is_finite() {
        return Err(Error::Input("matrix has non-finite entries".into()));
    }
    let det_err = (m.det() - 1.0).norm();
    if det_err > 1e-10 {
        return Err(Error::Input(format!(
            "matrix must have unit determinant, |det − 1| = {det_err:e}"
        )));
    }
    let p = m.adjoint().mul(m);
    let p22 = p.entry(1, 1).re;
    if p22.is_nan() || p22 <= 0.0 {
        return Err(Error::Input(format!(
            "M†M has non-positive (2,2) entry {p22}"
        )));
    }
    let z = p.entry(1, 0) / p22;
    let b = KElement::new(z.re, z.im, 1.0 / p22 - 1.0)?;
    let b_inv = b.inverse().to_matrix();
    let a = m.mul(&b_inv);
    // A is unitary up to rounding of M; re-project onto SU(2) is unnecessary
    // for unit-determinant input within 1e-10.
    Ok((SU2Element(a), b))
}

/// `(h ▷ g, h ◁ g)` from the factorization `h · g = (h ▷ g)(h ◁ g)`.
pub fn group_actions(h: &KElement, g: &SU2Element) -> Result<(SU2Element, KElement)> {
    iwasawa_factor(&h.to_matrix().mul(g.matrix()))
}

pub fn group_left_act(h: &KElement, g: &SU2Element) -> Result<SU2Element> {
    Ok(group_actions(h, g)?.0)
}

pub fn group_right_act(h: &KElement, g: &SU2Element) -> Result<KElement> {
    Ok(group_actions(h, g)?.1)
}

/// Matrix bases of `g` and `h` sitting inside `gl(2,C)` as a real Lie algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedBasis {
    pub g: Vec<Mat2C>,
    pub h: Vec<Mat2C>,
    pub g_names: Option<Vec<String>>,
    pub h_names: Option<Vec<String>>,
}

/// `e1, e2, e3` of `su(2)` and the tangent basis `f1, f2, f3` of `K` at the identity.
pub fn sl2c_basis() -> EmbeddedBasis {
    let z = c(0.0, 0.0);
    let half = c(0.5, 0.0);
    let e1 = Mat2C::new(z, -I * 0.5, -I * 0.5, z);
    let e2 = Mat2C::new(z, -half, half, z);
    let e3 = Mat2C::new(-I * 0.5, z, z, I * 0.5);
    let f1 = Mat2C::new(z, z, c(1.0, 0.0), z);
    let f2 = Mat2C::new(z, z, I, z);
    let f3 = Mat2C::new(half, z, z, -half);
    EmbeddedBasis {
        g: vec![e1, e2, e3],
        h: vec![f1, f2, f3],
        g_names: Some(numbered("e", 3)),
        h_names: Some(numbered("f", 3)),
    }
}

/// Solves `target = Σ x_I B_I` over the reals.
struct Decomposer {
    basis: DMatrix<f64>,
    svd: nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Decomposer {
    fn new(mats: &[Mat2C]) -> Result<Self> {
        let cols = mats.len();
        let mut basis = DMatrix::zeros(8, cols);
        for (j, m) in mats.iter().enumerate() {
            basis.set_column(j, &DVector::from_row_slice(&m.real_coords()));
        }
        let svd = basis.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if cols > 8 || smax == 0.0 || smin <= 1e-10 * smax {
            return Err(Error::Embedding(format!(
                "the {cols} basis matrices are not linearly independent over R"
            )));
        }
        Ok(Self { basis, svd })
    }

    fn solve(&self, target: &Mat2C, what: &str) -> Result<Vec<f64>> {
        let rhs = DVector::from_row_slice(&target.real_coords());
        let x = self
            .svd
            .solve(&rhs, 1e-14)
            .map_err(|e| Error::Embedding(e.to_string()))?;
        let residual = (&self.basis * &x - &rhs).amax();
        if residual > 1e-10 * (1.0 + rhs.amax()) {
            return Err(Error::Embedding(format!(
                "{what} leaves the span of the basis (residual {residual:e})"
            )));
        }
        // drop solver round-off so exact zeros stay exact
        let floor = 1e-13 * (1.0 + x.amax());
        Ok(x.iter()
            .map(|&v| if v.abs() <= floor { 0.0 } else { v })
            .collect())
    }
}

/// Derives both algebras and the mutual actions from matrix commutators:
/// `[f_a, e_i] = f_a ▷ e_i + f_a ◁ e_i` decomposed over `{e_k} ∪ {f_b}`.
///
/// The result is validated.
pub fn derive_actions(basis: &EmbeddedBasis) -> Result<MatchedPair> {
    let (n, m) = (basis.g.len(), basis.h.len());
    if n == 0 || m == 0 {
        return Err(Error::Embedding("both bases must be non-empty".into()));
    }
    let all: Vec<Mat2C> = basis.g.iter().chain(&basis.h).copied().collect();
    let dec = Decomposer::new(&all)?;

    let mut cg = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            let x = dec.solve(&basis.g[i].commutator(&basis.g[j]), "[e_i, e_j]")?;
            if x[n..].iter().any(|v| v.abs() > 1e-10) {
                return Err(Error::Embedding(format!(
                    "g is not closed under commutators: [e{}, e{}] has an h component",
                    i + 1,
                    j + 1
                )));
            }
            for k in 0..n {
                cg[(k * n + i) * n + j] = x[k];
            }
        }
    }

    let mut ch = vec![0.0; m * m * m];
    for a in 0..m {
        for b in 0..m {
            let x = dec.solve(&basis.h[a].commutator(&basis.h[b]), "[f_a, f_b]")?;
            if x[..n].iter().any(|v| v.abs() > 1e-10) {
                return Err(Error::Embedding(format!(
                    "h is not closed under commutators: [f{}, f{}] has a g component",
                    a + 1,
                    b + 1
                )));
            }
            for q in 0..m {
                ch[(q * m + a) * m + b] = x[n + q];
            }
        }
    }

    let mut rho = vec![0.0; n * m * n];
    let mut sigma = vec![0.0; m * m * n];
    for a in 0..m {
        for i in 0..n {
            let x = dec.solve(&basis.h[a].commutator(&basis.g[i]), "[f_a, e_i]")?;
            for k in 0..n {
                rho[(k * m + a) * n + i] = x[k];
            }
            for b in 0..m {
                sigma[(b * m + a) * n + i] = x[n + b];
            }
        }
    }

    let g = LieAlgebra::new(n, cg, basis.g_names.clone())?.validate()?;
    let h = LieAlgebra::new(m, ch, basis.h_names.clone())?.validate()?;
    MatchedPair::new(g, h, rho, sigma)?.validate()
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const K_AXIS: [f64; 3] = [0.0, 0.0, 1.0];

fn unit3(i: usize) -> [f64; 3] {
    let mut v = [0.0; 3];
    v[i] = 1.0;
    v
}

/// `𝔨 ≅ R³` with `[Y1, Y2] = k × (Y1 × Y2)`, basis `f1, f2, f3`.
pub fn k_algebra() -> LieAlgebra {
    LieAlgebra::from_fn(3, Some(numbered("f", 3)), |q, a, b| {
        cross(&K_AXIS, &cross(&unit3(a), &unit3(b)))[q]
    })
    .and_then(LieAlgebra::validate)
    .expect("k × (Y1 × Y2) is a Lie bracket")
}

/// The matched pair `su(2) ⋈ 𝔨` derived from matrix commutators (validated).
pub fn sl2c_derived() -> MatchedPair {
    derive_actions(&sl2c_basis()).expect("the sl(2,C) embedding decomposes")
}

/// The closed forms `Y ▷ X = Y × (X × k)` and `Y ◁ X = X × Y` in their
/// published form. Not a matched pair (unvalidated); kept for the audit.
pub fn sl2c_printed() -> MatchedPair {
    MatchedPair::from_fn(
        LieAlgebra::su2(),
        k_algebra(),
        |k, a, i| cross(&unit3(a), &cross(&unit3(i), &K_AXIS))[k],
        |b, a, i| cross(&unit3(i), &unit3(a))[b],
    )
    .expect("shapes are 3×3×3")
}

/// `e(3) = su(2) ⋉ R³`: `▷ = 0`, `Y ◁ X = Y × X`, abelian `h` (validated).
pub fn e3_heavytop() -> MatchedPair {
    let h = LieAlgebra::new(3, vec![0.0; 27], Some(numbered("f", 3)))
        .and_then(LieAlgebra::validate)
        .expect("abelian algebra");
    MatchedPair::from_fn(
        LieAlgebra::su2(),
        h,
        |_, _, _| 0.0,
        |b, a, i| levi_civita(a, i, b),
    )
    .and_then(MatchedPair::validate)
    .expect("e(3) is a matched pair")
}

/// Names accepted by [`builtin`].
pub const BUILTIN_PAIRS: [&str; 3] = ["sl2c_derived", "sl2c_printed", "e3_heavytop"];

/// Looks up a built-in pair; `sl2c` and `e3` are accepted as short names.
pub fn builtin(name: &str) -> Option<MatchedPair> {
    match name {
        "sl2c_derived" | "sl2c" => Some(sl2c_derived()),
        "sl2c_printed" => Some(sl2c_printed()),
        "e3_heavytop" | "e3" => Some(e3_heavytop()),
        _ => None,
    }
}

/// The printed `R³ ⋈ R³` closed forms for `sl(2,C)`, for auditing against
/// the canonical transposes.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sl2cPrintedForms;

impl FormulaSet for Sl2cPrintedForms {
    fn label(&self) -> &str {
        "sl2c_printed"
    }

    fn dims(&self) -> (usize, usize) {
        (3, 3)
    }

    fn lp_label(&self) -> &str {
        "LPESL"
    }

    /// `Y ▷ X = Y × (X × k)`
    fn left_act(&self, eta: &[f64], xi: &[f64]) -> Vec<f64> {
        cross(eta, &cross(xi, &K_AXIS)).to_vec()
    }

    /// `Y ◁ X = X × Y`
    fn right_act(&self, eta: &[f64], xi: &[f64]) -> Vec<f64> {
        cross(xi, eta).to_vec()
    }

    /// `Φ ⋆◁ Y = Φ × (k × Y)`
    fn co_left_act(&self, mu: &[f64], eta: &[f64]) -> Vec<f64> {
        cross(mu, &cross(&K_AXIS, eta)).to_vec()
    }

    /// `X ⋆▷ Ψ = Ψ × X`
    fn co_right_act(&self, xi: &[f64], nu: &[f64]) -> Vec<f64> {
        cross(nu, xi).to_vec()
    }

    /// `𝔞*_Y Ψ = Y × Ψ`
    fn a_star(&self, eta: &[f64], nu: &[f64]) -> Vec<f64> {
        cross(eta, nu).to_vec()
    }

    /// `𝔟*_X Φ = (Φ·k) X − (Φ·X) k`
    fn b_star(&self, xi: &[f64], mu: &[f64]) -> Vec<f64> {
        let (pk, px) = (dot(mu, &K_AXIS), dot(mu, xi));
        (0..3).map(|i| pk * xi[i] - px * K_AXIS[i]).collect()
    }

    /// `(ad*_X Φ + Φ ⋆◁ Y + 𝔞*_Y Ψ, ad*_Y Ψ + X ⋆▷ Ψ + 𝔟*_X Φ)` with
    /// `ad*_X Φ = X × Φ` and `ad*_Y Ψ = (k·Y) Ψ − (Ψ·Y) k`.
    fn double_ad_star(&self, x: &DoubleVector, p: &DualPoint) -> DualPoint {
        let (xx, yy) = (&x.xi.0, &x.eta.0);
        let (phi, psi) = (&p.mu.0, &p.nu.0);
        let ad_g = cross(xx, phi);
        let col = self.co_left_act(phi, yy);
        let a = self.a_star(yy, psi);
        let (ky, psiy) = (dot(&K_AXIS, yy), dot(psi, yy));
        let cor = self.co_right_act(xx, psi);
        let b = self.b_star(xx, phi);
        DualPoint::new(
            (0..3).map(|i| ad_g[i] + col[i] + a[i]).collect::<Vec<_>>(),
            (0..3)
                .map(|i| ky * psi[i] - psiy * K_AXIS[i] + cor[i] + b[i])
                .collect::<Vec<_>>(),
        )
    }

    /// The printed `R³ ⋈ R³` Lie-Poisson equations with `X = δH/δΦ`, `Y = δH/δΨ`:
    ///
    /// ```text
    /// Φ̇ = (X + Y × k) × Φ + Y × Ψ
    /// Ψ̇ = (k·Y) Ψ − (Ψ·Y + Φ·X) k + Ψ × X + (Φ·k) X
    /// ```
    fn lp_rhs(&self, p: &DualPoint, grad: &DoubleVector) -> DualPoint {
        let (xx, yy) = (&grad.xi.0, &grad.eta.0);
        let (phi, psi) = (&p.mu.0, &p.nu.0);
        let yk = cross(yy, &K_AXIS);
        let lead: Vec<f64> = (0..3).map(|i| xx[i] + yk[i]).collect();
        let t1 = cross(&lead, phi);
        let t2 = cross(yy, psi);
        let ky = dot(&K_AXIS, yy);
        let s = dot(psi, yy) + dot(phi, xx);
        let t3 = cross(psi, xx);
        let pk = dot(phi, &K_AXIS);
        DualPoint::new(
            (0..3).map(|i| t1[i] + t2[i]).collect::<Vec<_>>(),
            (0..3)
                .map(|i| ky * psi[i] - s * K_AXIS[i] + t3[i] + pk * xx[i])
                .collect::<Vec<_>>(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn k_to_matrix_examples() {
        assert_eq!(KElement::identity().to_matrix(), Mat2C::identity());
        let m = KElement::new(0.0, 0.0, 3.0).unwrap().to_matrix();
        let expected = Mat2C::new(c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0));
        assert!(m.max_abs_diff(&expected) <= 1e-15);
        assert!(KElement::new(0.0, 0.0, -1.0).is_err());

        let mut rng = seeded(7);
        for _ in 0..1000 {
            let k = KElement::random(&mut rng);
            assert!((k.to_matrix().det() - 1.0).norm() <= 1e-12);
        }
    }

    #[test]
    fn k_multiply_examples() {
        let p = KElement::new(1.0, 0.0, 0.0)
            .unwrap()
            .multiply(&KElement::new(0.0, 0.0, 1.0).unwrap());
        assert_eq!(
            p,
            KElement {
                a: 2.0,
                b: 0.0,
                c: 1.0
            }
        );

        let k = KElement::new(0.7, -1.3, 0.4).unwrap();
        assert_eq!(k.multiply(&KElement::identity()), k);
        assert!(k.multiply(&k.inverse()).max_abs_diff(&KElement::identity()) <= 1e-15);
    }

    #[test]
    fn iwasawa_examples() {
        let (a, b) = iwasawa_factor(&Mat2C::identity()).unwrap();
        assert!(a.matrix().max_abs_diff(&Mat2C::identity()) <= 1e-15);
        assert_eq!(b, KElement::identity());

        let mut rng = seeded(3);
        let u = SU2Element::random(&mut rng);
        let (a, b) = iwasawa_factor(u.matrix()).unwrap();
        assert!(a.matrix().max_abs_diff(u.matrix()) <= 1e-14);
        assert!(b.max_abs_diff(&KElement::identity()) <= 1e-14);

        let m = Mat2C::new(c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0));
        let (a, b) = iwasawa_factor(&m).unwrap();
        assert!(a.matrix().max_abs_diff(&Mat2C::identity()) <= 1e-15);
        assert!(
            b.max_abs_diff(&KElement {
                a: 0.0,
                b: 0.0,
                c: 3.0
            }) <= 1e-15
        );
    }

    #[test]
    fn iwasawa_rejects_non_unimodular() {
        let m = Mat2C::new(c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        assert!(matches!(iwasawa_factor(&m), Err(Error::Input(_))));
    }

    #[test]
    fn su2_rejects_non_unitary() {
        let m = Mat2C::new(c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0));
        assert!(SU2Element::new(m).is_err());
        let mut rng = seeded(11);
        let g = SU2Element::random(&mut rng);
        assert!(SU2Element::new(*g.matrix()).is_ok());
    }

    #[test]
    fn group_action_unit_laws() {
        let mut rng = seeded(5);
        let g = SU2Element::random(&mut rng);
        let (hg, hr) = group_actions(&KElement::identity(), &g).unwrap();
        assert!(hg.matrix().max_abs_diff(g.matrix()) <= 1e-14);
        assert!(hr.max_abs_diff(&KElement::identity()) <= 1e-14);

        let h = KElement::random(&mut rng);
        let (hg, hr) = group_actions(&h, &SU2Element::identity()).unwrap();
        assert!(hg.matrix().max_abs_diff(&Mat2C::identity()) <= 1e-14);
        assert!(hr.max_abs_diff(&h) <= 1e-14);
    }

    #[test]
    fn derived_sl2c_examples() {
        let mp = sl2c_derived();
        assert!(mp.is_validated());
        // f3 ▷ e1 = e1, f3 ◁ e1 = f2
        assert!((mp.rho(0, 2, 0) - 1.0).abs() <= 1e-12);
        assert!((mp.sigma(1, 2, 0) - 1.0).abs() <= 1e-12);
        let su2 = LieAlgebra::su2();
        for (a, b) in mp.g().constants().iter().zip(su2.constants()) {
            assert!((a - b).abs() <= 1e-12);
        }
        for (a, b) in mp.h().constants().iter().zip(k_algebra().constants()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn commuting_bases_give_zero_tensors() {
        let z = c(0.0, 0.0);
        let basis = EmbeddedBasis {
            g: vec![Mat2C::new(c(1.0, 0.0), z, z, c(-1.0, 0.0))],
            h: vec![Mat2C::new(I, z, z, -I)],
            g_names: None,
            h_names: None,
        };
        let mp = derive_actions(&basis).unwrap();
        assert_eq!(mp.rho(0, 0, 0), 0.0);
        assert_eq!(mp.sigma(0, 0, 0), 0.0);
        assert_eq!(mp.g().max_abs_constant(), 0.0);
    }

    #[test]
    fn dependent_or_open_bases_are_rejected() {
        let b = sl2c_basis();
        let dependent = EmbeddedBasis {
            g: vec![b.g[0], b.g[0]],
            h: vec![b.h[0]],
            g_names: None,
            h_names: None,
        };
        assert!(matches!(
            derive_actions(&dependent),
            Err(Error::Embedding(_))
        ));

        // span{e1} ⊕ span{f1} is not closed under commutators
        let open = EmbeddedBasis {
            g: vec![b.g[0]],
            h: vec![b.h[0]],
            g_names: None,
            h_names: None,
        };
        assert!(matches!(derive_actions(&open), Err(Error::Embedding(_))));
    }

    #[test]
    fn builtin_pair_validation_status() {
        assert!(sl2c_derived().compat_defect().passes());
        let e3 = e3_heavytop().compat_defect();
        assert_eq!((e3.d1, e3.d2), (0.0, 0.0));
        assert!(sl2c_printed().compat_defect().d1 >= 4.0 - 1e-12);
        assert!(!sl2c_printed().is_validated());
        for name in BUILTIN_PAIRS {
            assert!(builtin(name).is_some());
        }
        assert!(builtin("nope").is_none());
    }
}
