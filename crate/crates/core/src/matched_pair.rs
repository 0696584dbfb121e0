//! Matched pairs of Lie algebras: mutual actions, their duals, the double
//! algebra, and the matched Lie-Poisson and Euler-Poincaré vector fields.
//!
//! Index conventions, with `n = dim g`, `m = dim h`, `e_i` a basis of `g`
//! and `f_a` a basis of `h`:
//!
//! * `rho[k][a][i]`: `f_a ▷ e_i = Σ_k rho[k][a][i] e_k` (left action of `h` on `g`)
//! * `sigma[b][a][i]`: `f_a ◁ e_i = Σ_b sigma[b][a][i] f_b` (right action of `g` on `h`)
//!
//! Every dual map is the exact transpose of one of these tensors, and all
//! dynamics are assembled from the double's structure constants.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::Lagrangian;
use crate::error::{check_len, Error, Result};
use crate::lie::{AlgebraVector, Convention, DualVector, LieAlgebra};
use crate::tolerance;

/// A point `(μ, ν)` of the dual of the double.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualPoint {
    pub mu: DualVector,
    pub nu: DualVector,
}

/// An element `(ξ, η)` of the double.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleVector {
    pub xi: AlgebraVector,
    pub eta: AlgebraVector,
}

impl DualPoint {
    pub fn new(mu: impl Into<DualVector>, nu: impl Into<DualVector>) -> Self {
        Self {
            mu: mu.into(),
            nu: nu.into(),
        }
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self::new(vec![0.0; n], vec![0.0; m])
    }

    /// Splits a flat `[μ, ν]` coordinate array after `n` entries.
    pub fn from_flat(flat: &[f64], n: usize) -> Self {
        Self::new(flat[..n].to_vec(), flat[n..].to_vec())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.mu.0.clone();
        v.extend_from_slice(&self.nu.0);
        v
    }

    pub fn pair(&self, x: &DoubleVector) -> f64 {
        self.mu.pair(&x.xi) + self.nu.pair(&x.eta)
    }

    pub fn max_abs(&self) -> f64 {
        self.mu.max_abs().max(self.nu.max_abs())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            mu: self.mu.sub(&other.mu),
            nu: self.nu.sub(&other.nu),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            mu: self.mu.scaled(factor),
            nu: self.nu.scaled(factor),
        }
    }
}

impl DoubleVector {
    pub fn new(xi: impl Into<AlgebraVector>, eta: impl Into<AlgebraVector>) -> Self {
        Self {
            xi: xi.into(),
            eta: eta.into(),
        }
    }

    pub fn from_flat(flat: &[f64], n: usize) -> Self {
        Self::new(flat[..n].to_vec(), flat[n..].to_vec())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.xi.0.clone();
        v.extend_from_slice(&self.eta.0);
        v
    }
}

/// Which of the two compatibility conditions a witness violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompatCondition {
    /// `η ▷ [ξ1, ξ2]` condition, indexed `(a, i, j)`.
    LeftOnBracket,
    /// `[η1, η2] ◁ ξ` condition, indexed `(a, b, i)`.
    BracketOnRight,
}

/// The basis triple maximizing a compatibility defect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatWitness {
    pub condition: CompatCondition,
    pub indices: (usize, usize, usize),
    pub labels: (String, String, String),
    /// Defect vector at the triple (in `g` for the first condition, `h` for the second).
    pub residual: Vec<f64>,
}

impl fmt::Display for CompatWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            self.labels.0, self.labels.1, self.labels.2
        )
    }
}

/// Result of checking both compatibility conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatDefect {
    pub d1: f64,
    pub d2: f64,
    /// Present when either defect exceeds `tolerance`.
    pub witness: Option<CompatWitness>,
    pub tolerance: f64,
}

impl CompatDefect {
    pub fn passes(&self) -> bool {
        self.d1 <= self.tolerance && self.d2 <= self.tolerance
    }
}

/// Two Lie algebras with mutual actions `▷: h ⊗ g → g`, `◁: h ⊗ g → h`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPair {
    g: LieAlgebra,
    h: LieAlgebra,
    rho: Vec<f64>,
    sigma: Vec<f64>,
    validated: bool,
}

impl MatchedPair {
    /// Builds a pair from flat action tensors: `rho` is `n×m×n` in
    /// `[k][a][i]` order, `sigma` is `m×m×n` in `[b][a][i]` order.
    pub fn new(g: LieAlgebra, h: LieAlgebra, rho: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        let (n, m) = (g.dim(), h.dim());
        check_len("rho tensor", n * m * n, rho.len())?;
        check_len("sigma tensor", m * m * n, sigma.len())?;
        if rho.iter().chain(&sigma).any(|v| !v.is_finite()) {
            return Err(Error::Input("non-finite action tensor entry".into()));
        }
        Ok(Self {
            g,
            h,
            rho,
            sigma,
            validated: false,
        })
    }

    /// Builds a pair from closures giving `rho[k][a][i]` and `sigma[b][a][i]`.
    pub fn from_fn(
        g: LieAlgebra,
        h: LieAlgebra,
        rho: impl Fn(usize, usize, usize) -> f64,
        sigma: impl Fn(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let (n, m) = (g.dim(), h.dim());
        let mut r = Vec::with_capacity(n * m * n);
        for k in 0..n {
            for a in 0..m {
                for i in 0..n {
                    r.push(rho(k, a, i));
                }
            }
        }
        let mut s = Vec::with_capacity(m * m * n);
        for b in 0..m {
            for a in 0..m {
                for i in 0..n {
                    s.push(sigma(b, a, i));
                }
            }
        }
        Self::new(g, h, r, s)
    }

    /// Both actions zero: the direct product.
    pub fn direct_product(g: LieAlgebra, h: LieAlgebra) -> Result<Self> {
        Self::from_fn(g, h, |_, _, _| 0.0, |_, _, _| 0.0)
    }

    pub fn g(&self) -> &LieAlgebra {
        &self.g
    }

    pub fn h(&self) -> &LieAlgebra {
        &self.h
    }

    pub fn n(&self) -> usize {
        self.g.dim()
    }

    pub fn m(&self) -> usize {
        self.h.dim()
    }

    /// `rho[k][a][i]`.
    pub fn rho(&self, k: usize, a: usize, i: usize) -> f64 {
        let (n, m) = (self.n(), self.m());
        self.rho[(k * m + a) * n + i]
    }

    /// `sigma[b][a][i]`.
    pub fn sigma(&self, b: usize, a: usize, i: usize) -> f64 {
        let (n, m) = (self.n(), self.m());
        self.sigma[(b * m + a) * n + i]
    }

    pub fn rho_nested(&self) -> Vec<Vec<Vec<f64>>> {
        let (n, m) = (self.n(), self.m());
        (0..n)
            .map(|k| {
                (0..m)
                    .map(|a| (0..n).map(|i| self.rho(k, a, i)).collect())
                    .collect()
            })
            .collect()
    }

    pub fn sigma_nested(&self) -> Vec<Vec<Vec<f64>>> {
        let (n, m) = (self.n(), self.m());
        (0..m)
            .map(|b| {
                (0..m)
                    .map(|a| (0..n).map(|i| self.sigma(b, a, i)).collect())
                    .collect()
            })
            .collect()
    }

    pub fn g_name(&self, i: usize) -> String {
        self.g.basis_name(i, "e")
    }

    pub fn h_name(&self, a: usize) -> String {
        self.h.basis_name(a, "f")
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }

    /// `1 + max` magnitude over all constants and action tensors.
    pub fn scale(&self) -> f64 {
        let t = self
            .rho
            .iter()
            .chain(&self.sigma)
            .fold(0.0_f64, |acc, v| acc.max(v.abs()));
        1.0 + t
            .max(self.g.max_abs_constant())
            .max(self.h.max_abs_constant())
    }

    pub fn compat_tolerance(&self) -> f64 {
        tolerance::COMPAT_REL * self.scale() * tolerance::factor()
    }

    /// `η ▷ ξ`.
    pub fn left_act(&self, eta: &AlgebraVector, xi: &AlgebraVector) -> Result<AlgebraVector> {
        check_len("left action (h argument)", self.m(), eta.len())?;
        check_len("left action (g argument)", self.n(), xi.len())?;
        Ok(AlgebraVector(self.left_raw(&eta.0, &xi.0)))
    }

    /// `η ◁ ξ`.
    pub fn right_act(&self, eta: &AlgebraVector, xi: &AlgebraVector) -> Result<AlgebraVector> {
        check_len("right action (h argument)", self.m(), eta.len())?;
        check_len("right action (g argument)", self.n(), xi.len())?;
        Ok(AlgebraVector(self.right_raw(&eta.0, &xi.0)))
    }

    /// `μ ⋆◁ η`, defined by `⟨μ ⋆◁ η, ξ⟩ = ⟨μ, η ▷ ξ⟩`.
    pub fn co_left_act(&self, mu: &DualVector, eta: &AlgebraVector) -> Result<DualVector> {
        check_len("co-left action (g* argument)", self.n(), mu.len())?;
        check_len("co-left action (h argument)", self.m(), eta.len())?;
        Ok(DualVector(self.co_left_raw(&mu.0, &eta.0)))
    }

    /// `𝔞*_η ν`, defined by `⟨𝔞*_η ν, ξ⟩ = ⟨ν, η ◁ ξ⟩`.
    pub fn a_star(&self, eta: &AlgebraVector, nu: &DualVector) -> Result<DualVector> {
        check_len("a* (h argument)", self.m(), eta.len())?;
        check_len("a* (h* argument)", self.m(), nu.len())?;
        Ok(DualVector(self.a_star_raw(&eta.0, &nu.0)))
    }

    /// `ξ ⋆▷ ν`, defined by `⟨ξ ⋆▷ ν, η⟩ = ⟨ν, η ◁ ξ⟩`.
    pub fn co_right_act(&self, xi: &AlgebraVector, nu: &DualVector) -> Result<DualVector> {
        check_len("co-right action (g argument)", self.n(), xi.len())?;
        check_len("co-right action (h* argument)", self.m(), nu.len())?;
        Ok(DualVector(self.co_right_raw(&xi.0, &nu.0)))
    }

    /// `𝔟*_ξ μ`, defined by `⟨𝔟*_ξ μ, η⟩ = ⟨μ, η ▷ ξ⟩`.
    pub fn b_star(&self, xi: &AlgebraVector, mu: &DualVector) -> Result<DualVector> {
        check_len("b* (g argument)", self.n(), xi.len())?;
        check_len("b* (g* argument)", self.n(), mu.len())?;
        Ok(DualVector(self.b_star_raw(&xi.0, &mu.0)))
    }

    pub(crate) fn left_raw(&self, eta: &[f64], xi: &[f64]) -> Vec<f64> {
        let (n, m) = (self.n(), self.m());
        let mut out = vec![0.0; n];
        for (k, o) in out.iter_mut().enumerate() {
            for a in 0..m {
                for i in 0..n {
                    *o += self.rho(k, a, i) * eta[a] * xi[i];
                }
            }
        }
        out
    }

    pub(crate) fn right_raw(&self, eta: &[f64], xi: &[f64]) -> Vec<f64> {
        let (n, m) = (self.n(), self.m());
        let mut out = vec![0.0; m];
        for (b, o) in out.iter_mut().enumerate() {
            for a in 0..m {
                for i in 0..n {
                    *o += self.sigma(b, a, i) * eta[a] * xi[i];
                }
            }
        }
        out
    }

    pub(crate) fn co_left_raw(&self, mu: &[f64], eta: &[f64]) -> Vec<f64> {
        let (n, m) = (self.n(), self.m());
        let mut out = vec![0.0; n];
        for (i, o) in out.iter_mut().enumerate() {
            for k in 0..n {
                for a in 0..m {
                    *o += self.rho(k, a, i) * eta[a] * mu[k];
                }
            }
        }
        out
    }

    pub(crate) fn a_star_raw(&self, eta: &[f64], nu: &[f64]) -> Vec<f64> {
        let (n, m) = (self.n(), self.m());
        let mut out = vec![0.0; n];
        for (i, o) in out.iter_mut().enumerate() {
            for b in 0..m {
                for a in 0..m {
                    *o += self.sigma(b, a, i) * eta[a] * nu[b];
                }
            }
        }
        out
    }

    pub(crate) fn co_right_raw(&self, xi: &[f64], nu: &[f64]) -> Vec<f64> {
        let (n, m) = (self.n(), self.m());
        let mut out = vec![0.0; m];
        for (a, o) in out.iter_mut().enumerate() {
            for b in 0..m {
                for i in 0..n {
                    *o += self.sigma(b, a, i) * xi[i] * nu[b];
                }
            }
        }
        out
    }

    pub(crate) fn b_star_raw(&self, xi: &[f64], mu: &[f64]) -> Vec<f64> {
        let (n, m) = (self.n(), self.m());
        let mut out = vec![0.0; m];
        for (a, o) in out.iter_mut().enumerate() {
            for k in 0..n {
                for i in 0..n {
                    *o += self.rho(k, a, i) * xi[i] * mu[k];
                }
            }
        }
        out
    }

    /// Max-norm defects of the two compatibility conditions over basis triples:
    ///
    /// 1. `η▷[ξ1,ξ2] − [η▷ξ1, ξ2] − [ξ1, η▷ξ2] − (η◁ξ1)▷ξ2 + (η◁ξ2)▷ξ1`
    /// 2. `[η1,η2]◁ξ − [η1, η2◁ξ] − [η1◁ξ, η2] − η1◁(η2▷ξ) + η2◁(η1▷ξ)`
    ///
    /// The witness is the first triple (lexicographic) attaining the larger
    /// failing defect.
    pub fn compat_defect(&self) -> CompatDefect {
        let (n, m) = (self.n(), self.m());
        let e = |i: usize| unit(n, i);
        let f = |a: usize| unit(m, a);
        let (g, h) = (&self.g, &self.h);

        let mut d1 = 0.0_f64;
        let mut w1: Option<((usize, usize, usize), Vec<f64>)> = None;
        for a in 0..m {
            let fa = f(a);
            for i in 0..n {
                for j in 0..n {
                    let (ei, ej) = (e(i), e(j));
                    let lhs = self.left_raw(&fa, &g.bracket_raw(&ei, &ej));
                    let t1 = g.bracket_raw(&self.left_raw(&fa, &ei), &ej);
                    let t2 = g.bracket_raw(&ei, &self.left_raw(&fa, &ej));
                    let t3 = self.left_raw(&self.right_raw(&fa, &ei), &ej);
                    let t4 = self.left_raw(&self.right_raw(&fa, &ej), &ei);
                    let r: Vec<f64> = (0..n)
                        .map(|k| lhs[k] - t1[k] - t2[k] - t3[k] + t4[k])
                        .collect();
                    let norm = max_abs(&r);
                    if norm > d1 {
                        d1 = norm;
                        w1 = Some(((a, i, j), r));
                    }
                }
            }
        }

        let mut d2 = 0.0_f64;
        let mut w2: Option<((usize, usize, usize), Vec<f64>)> = None;
        for a in 0..m {
            let fa = f(a);
            for b in 0..m {
                let fb = f(b);
                for i in 0..n {
                    let ei = e(i);
                    let lhs = self.right_raw(&h.bracket_raw(&fa, &fb), &ei);
                    let t1 = h.bracket_raw(&fa, &self.right_raw(&fb, &ei));
                    let t2 = h.bracket_raw(&self.right_raw(&fa, &ei), &fb);
                    let t3 = self.right_raw(&fa, &self.left_raw(&fb, &ei));
                    let t4 = self.right_raw(&fb, &self.left_raw(&fa, &ei));
                    let r: Vec<f64> = (0..m)
                        .map(|c| lhs[c] - t1[c] - t2[c] - t3[c] + t4[c])
                        .collect();
                    let norm = max_abs(&r);
                    if norm > d2 {
                        d2 = norm;
                        w2 = Some(((a, b, i), r));
                    }
                }
            }
        }

        let tolerance = self.compat_tolerance();
        let witness = if d1 > tolerance && d1 >= d2 {
            w1.map(|((a, i, j), residual)| CompatWitness {
                condition: CompatCondition::LeftOnBracket,
                indices: (a, i, j),
                labels: (self.h_name(a), self.g_name(i), self.g_name(j)),
                residual,
            })
        } else if d2 > tolerance {
            w2.map(|((a, b, i), residual)| CompatWitness {
                condition: CompatCondition::BracketOnRight,
                indices: (a, b, i),
                labels: (self.h_name(a), self.h_name(b), self.g_name(i)),
                residual,
            })
        } else {
            None
        };

        CompatDefect {
            d1,
            d2,
            witness,
            tolerance,
        }
    }

    /// Checks compatibility and the Jacobi identity of the double, and marks
    /// the pair as validated.
    pub fn validate(mut self) -> Result<Self> {
        if self.validated {
            return Ok(self);
        }
        if !self.g.is_validated() {
            self.g = self.g.clone().validate()?;
        }
        if !self.h.is_validated() {
            self.h = self.h.clone().validate()?;
        }
        let compat = self.compat_defect();
        if !compat.passes() {
            let witness = compat
                .witness
                .as_ref()
                .map(|w| format!(" at {w}"))
                .unwrap_or_default();
            return Err(Error::Validation(format!(
                "compatibility defects d1 = {:e}, d2 = {:e} exceed {:e}{witness}",
                compat.d1, compat.d2, compat.tolerance
            )));
        }
        let (jac, limit) = self.double_jacobi()?;
        if jac > limit {
            return Err(Error::Validation(format!(
                "Jacobi defect of the double {jac:e} exceeds {limit:e}"
            )));
        }
        self.validated = true;
        Ok(self)
    }

    /// Jacobi defect of the assembled double and the limit applied by
    /// [`MatchedPair::validate`].
    pub fn double_jacobi(&self) -> Result<(f64, f64)> {
        let double = self.assemble_constants()?;
        let limit = tolerance::COMPAT_REL * self.scale() * tolerance::factor();
        Ok((double.jacobi_defect(), limit))
    }

    fn assemble_constants(&self) -> Result<LieAlgebra> {
        let (n, m) = (self.n(), self.m());
        let dim = n + m;
        // [(ξ1,η1),(ξ2,η2)] = ([ξ1,ξ2] + η1▷ξ2 − η2▷ξ1, [η1,η2] + η1◁ξ2 − η2◁ξ1)
        let c = |k: usize, i: usize, j: usize| -> f64 {
            match (i < n, j < n) {
                (true, true) => {
                    if k < n {
                        self.g.c(k, i, j)
                    } else {
                        0.0
                    }
                }
                (false, false) => {
                    if k >= n {
                        self.h.c(k - n, i - n, j - n)
                    } else {
                        0.0
                    }
                }
                // [(0, f_a), (e_j, 0)] = (f_a ▷ e_j, f_a ◁ e_j)
                (false, true) => {
                    let a = i - n;
                    if k < n {
                        self.rho(k, a, j)
                    } else {
                        self.sigma(k - n, a, j)
                    }
                }
                // [(e_i, 0), (0, f_a)] = −(f_a ▷ e_i, f_a ◁ e_i)
                (true, false) => {
                    let a = j - n;
                    if k < n {
                        -self.rho(k, a, i)
                    } else {
                        -self.sigma(k - n, a, i)
                    }
                }
            }
        };
        let names = match (self.g.names(), self.h.names()) {
            (None, None) => None,
            _ => Some(
                (0..n)
                    .map(|i| self.g_name(i))
                    .chain((0..m).map(|a| self.h_name(a)))
                    .collect(),
            ),
        };
        LieAlgebra::from_fn(dim, names, c)
    }

    /// Assembles `g ⋈ h`. The result is validated when the pair is.
    pub fn build_double(&self) -> Result<DoubleAlgebra> {
        let mut algebra = self.assemble_constants()?;
        if self.validated {
            algebra = algebra.validate()?;
        }
        Ok(DoubleAlgebra {
            algebra,
            n: self.n(),
            m: self.m(),
            source: self.clone(),
        })
    }

    /// Matched Euler-Poincaré rates at velocity `(ξ, η)` for a quadratic
    /// Lagrangian with momenta `μ = M_g ξ`, `ν = M_h η`:
    ///
    /// ```text
    /// μ̇ = −ad*_ξ μ + μ ⋆◁ η + 𝔞*_η ν
    /// ν̇ = −ad*_η ν − ξ ⋆▷ ν − 𝔟*_ξ μ
    /// ```
    pub fn euler_poincare_rhs(
        &self,
        xi: &AlgebraVector,
        eta: &AlgebraVector,
        lagrangian: &Lagrangian,
    ) -> Result<EpRates> {
        check_len("Euler-Poincaré velocity (g)", self.n(), xi.len())?;
        check_len("Euler-Poincaré velocity (h)", self.m(), eta.len())?;
        lagrangian.check_dims(self.n(), self.m())?;
        let momenta = lagrangian.momenta(xi, eta)?;
        let rates = self.ep_rates_raw(xi, eta, &momenta);
        Ok(EpRates {
            momenta,
            velocities: DoubleVector::new(xi.clone(), eta.clone()),
            rates,
        })
    }

    /// Same vector field expressed on momenta; velocities are recovered
    /// through the inverse metric.
    pub fn euler_poincare_rhs_momenta(
        &self,
        momenta: &DualPoint,
        lagrangian: &Lagrangian,
    ) -> Result<EpRates> {
        check_len("Euler-Poincaré momentum (g*)", self.n(), momenta.mu.len())?;
        check_len("Euler-Poincaré momentum (h*)", self.m(), momenta.nu.len())?;
        lagrangian.check_dims(self.n(), self.m())?;
        let velocities = lagrangian.velocities(momenta)?;
        let rates = self.ep_rates_raw(&velocities.xi, &velocities.eta, momenta);
        Ok(EpRates {
            momenta: momenta.clone(),
            velocities,
            rates,
        })
    }

    fn ep_rates_raw(&self, xi: &AlgebraVector, eta: &AlgebraVector, p: &DualPoint) -> DualPoint {
        let (mu, nu) = (&p.mu.0, &p.nu.0);
        let ad_mu = self.g.ad_star_raw(&xi.0, mu);
        let col = self.co_left_raw(mu, &eta.0);
        let a = self.a_star_raw(&eta.0, nu);
        let ad_nu = self.h.ad_star_raw(&eta.0, nu);
        let cor = self.co_right_raw(&xi.0, nu);
        let b = self.b_star_raw(&xi.0, mu);
        DualPoint::new(
            (0..self.n())
                .map(|i| -ad_mu[i] + col[i] + a[i])
                .collect::<Vec<_>>(),
            (0..self.m())
                .map(|c| -ad_nu[c] - cor[c] - b[c])
                .collect::<Vec<_>>(),
        )
    }
}

/// Output of the Euler-Poincaré vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct EpRates {
    /// `(μ, ν) = (δL/δξ, δL/δη)`.
    pub momenta: DualPoint,
    pub velocities: DoubleVector,
    /// `d/dt (μ, ν)`.
    pub rates: DualPoint,
}

/// The double `g ⋈ h` with its block structure.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleAlgebra {
    algebra: LieAlgebra,
    n: usize,
    m: usize,
    source: MatchedPair,
}

impl DoubleAlgebra {
    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn source(&self) -> &MatchedPair {
        &self.source
    }

    pub fn split(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    pub fn dim(&self) -> usize {
        self.n + self.m
    }

    pub fn is_validated(&self) -> bool {
        self.algebra.is_validated()
    }

    fn check_point(&self, p: &DualPoint) -> Result<()> {
        check_len("dual point (g*)", self.n, p.mu.len())?;
        check_len("dual point (h*)", self.m, p.nu.len())
    }

    fn check_vector(&self, x: &DoubleVector) -> Result<()> {
        check_len("double vector (g)", self.n, x.xi.len())?;
        check_len("double vector (h)", self.m, x.eta.len())
    }

    /// `[(ξ1, η1), (ξ2, η2)]` in the double.
    pub fn bracket(&self, x: &DoubleVector, y: &DoubleVector) -> Result<DoubleVector> {
        self.check_vector(x)?;
        self.check_vector(y)?;
        let r = self.algebra.bracket_raw(&x.to_flat(), &y.to_flat());
        Ok(DoubleVector::from_flat(&r, self.n))
    }

    /// Cobracket at `p`: `M[I][J] = ⟨p, [E_I, E_J]⟩`, which is also the
    /// linear Poisson tensor at `p`.
    pub fn cobracket(&self, p: &DualPoint) -> Result<DMatrix<f64>> {
        self.check_point(p)?;
        let z = p.to_flat();
        let d = self.dim();
        Ok(DMatrix::from_fn(d, d, |i, j| {
            (0..d).map(|k| z[k] * self.algebra.c(k, i, j)).sum()
        }))
    }

    /// Matched Lie-Poisson bracket `{H, F}(p) = ∇Hᵀ · M(p) · ∇F`.
    pub fn matched_bracket(
        &self,
        p: &DualPoint,
        grad_h: &DoubleVector,
        grad_f: &DoubleVector,
    ) -> Result<f64> {
        self.check_vector(grad_h)?;
        self.check_vector(grad_f)?;
        let m = self.cobracket(p)?;
        let gh = grad_h.to_flat();
        let gf = grad_f.to_flat();
        let d = self.dim();
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += gh[i] * m[(i, j)] * gf[j];
            }
        }
        Ok(acc)
    }

    /// Coadjoint action of the double, `⟨ad*_x p, y⟩ = −⟨p, [x, y]⟩`.
    ///
    /// In components, with `x = (X, Y)`:
    ///
    /// ```text
    /// μ̇ = ad*_X μ − μ ⋆◁ Y − 𝔞*_Y ν
    /// ν̇ = ad*_Y ν + X ⋆▷ ν + 𝔟*_X μ
    /// ```
    pub fn ad_star(&self, x: &DoubleVector, p: &DualPoint) -> Result<DualPoint> {
        self.check_vector(x)?;
        self.check_point(p)?;
        if !self.is_validated() {
            return Err(Error::Validation(
                "matched Lie-Poisson dynamics need a validated double".into(),
            ));
        }
        let r = self.algebra.ad_star_raw(&x.to_flat(), &p.to_flat());
        Ok(DualPoint::from_flat(&r, self.n))
    }

    /// Matched Lie-Poisson vector field. `Right` gives `Ḟ = {F, H}`.
    pub fn lp_rhs(
        &self,
        p: &DualPoint,
        grad_h: &DoubleVector,
        convention: Convention,
    ) -> Result<DualPoint> {
        let v = self.ad_star(grad_h, p)?;
        Ok(match convention {
            Convention::Right => v,
            Convention::Left => v.scaled(-1.0),
        })
    }

    /// Flat-coordinate variant used by the integrators.
    pub(crate) fn lp_rhs_flat(&self, z: &[f64], grad: &[f64], sign: f64) -> Vec<f64> {
        let mut r = self.algebra.ad_star_raw(grad, z);
        if sign != 1.0 {
            r.iter_mut().for_each(|v| *v *= sign);
        }
        r
    }
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}
