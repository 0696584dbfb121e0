//! Finite-dimensional real Lie algebras given by structure constants, their
//! duals, and the single-algebra Lie-Poisson machinery.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::tolerance;

/// Coordinates of an element of a Lie algebra in its coordinate basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AlgebraVector(pub Vec<f64>);

/// Coordinates of an element of the dual space in the dual basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DualVector(pub Vec<f64>);

macro_rules! coordinate_vector {
    ($ty:ident) => {
        impl $ty {
            pub fn new(coords: Vec<f64>) -> Self {
                Self(coords)
            }

            pub fn zeros(dim: usize) -> Self {
                Self(vec![0.0; dim])
            }

            /// The `index`-th coordinate basis vector.
            pub fn basis(dim: usize, index: usize) -> Self {
                let mut v = vec![0.0; dim];
                v[index] = 1.0;
                Self(v)
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn max_abs(&self) -> f64 {
                self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
            }

            pub fn scaled(&self, factor: f64) -> Self {
                Self(self.0.iter().map(|v| v * factor).collect())
            }

            pub fn add(&self, other: &Self) -> Self {
                Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
            }

            pub fn sub(&self, other: &Self) -> Self {
                Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
            }
        }

        impl From<Vec<f64>> for $ty {
            fn from(v: Vec<f64>) -> Self {
                Self(v)
            }
        }

        impl From<&[f64]> for $ty {
            fn from(v: &[f64]) -> Self {
                Self(v.to_vec())
            }
        }
    };
}

coordinate_vector!(AlgebraVector);
coordinate_vector!(DualVector);

impl DualVector {
    /// The natural pairing `⟨μ, ξ⟩ = Σ μ_i ξ^i`.
    pub fn pair(&self, xi: &AlgebraVector) -> f64 {
        self.0.iter().zip(&xi.0).map(|(a, b)| a * b).sum()
    }
}

/// Sign convention for Lie-Poisson flows.
///
/// `Right` is `μ̇ = ad*_{∂H} μ`, so that `Ḟ = {F, H}` with
/// `{F, H}(μ) = ⟨μ, [∂F, ∂H]⟩`. `Left` is its negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    #[default]
    Right,
    Left,
}

impl Convention {
    pub fn sign(self) -> f64 {
        match self {
            Convention::Right => 1.0,
            Convention::Left => -1.0,
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::Right => "right",
            Convention::Left => "left",
        })
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "right" => Ok(Convention::Right),
            "left" => Ok(Convention::Left),
            other => Err(Error::Input(format!(
                "unknown convention '{other}', expected 'right' or 'left'"
            ))),
        }
    }
}

/// A real Lie algebra `[e_i, e_j] = Σ_k C[k][i][j] e_k`.
///
/// Constants are stored densely with index order `[target][left][right]`.
/// Instances are immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebra {
    dim: usize,
    constants: Vec<f64>,
    names: Option<Vec<String>>,
    validated: bool,
}

impl LieAlgebra {
    /// Builds an algebra from flat constants in `[k][i][j]` order.
    ///
    /// Small asymmetries (below `1e-12 · (1 + max|C|)`) are removed by
    /// antisymmetrizing over the last two indices; larger ones are rejected.
    /// Jacobi is not checked here, see [`LieAlgebra::validate`].
    pub fn new(dim: usize, constants: Vec<f64>, names: Option<Vec<String>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input(
                "Lie algebra dimension must be positive".into(),
            ));
        }
        check_len("structure constants", dim * dim * dim, constants.len())?;
        if let Some(names) = &names {
            check_len("basis names", dim, names.len())?;
        }
        if let Some(bad) = constants.iter().find(|c| !c.is_finite()) {
            return Err(Error::Input(format!("non-finite structure constant {bad}")));
        }

        let (defect, witness) = antisymmetry_defect(dim, &constants);
        let limit =
            tolerance::ANTISYMMETRY_REL * tolerance::scale_of(&constants) * tolerance::factor();
        if defect > limit {
            let (k, i, j) = witness;
            return Err(Error::NotAntisymmetric { k, i, j, defect });
        }

        let mut c = constants;
        for k in 0..dim {
            for i in 0..dim {
                for j in i..dim {
                    let a = c[idx(dim, k, i, j)];
                    let b = c[idx(dim, k, j, i)];
                    let avg = 0.5 * (a - b);
                    c[idx(dim, k, i, j)] = avg;
                    c[idx(dim, k, j, i)] = -avg;
                }
            }
        }

        Ok(Self {
            dim,
            constants: c,
            names,
            validated: false,
        })
    }

    /// Builds an algebra from `C[k][i][j]` nested arrays.
    pub fn from_nested(nested: &[Vec<Vec<f64>>], names: Option<Vec<String>>) -> Result<Self> {
        let dim = nested.len();
        let mut flat = Vec::with_capacity(dim * dim * dim);
        for plane in nested {
            check_len("structure constants (middle index)", dim, plane.len())?;
            for row in plane {
                check_len("structure constants (last index)", dim, row.len())?;
                flat.extend_from_slice(row);
            }
        }
        Self::new(dim, flat, names)
    }

    /// Builds an algebra from a closure giving `C[k][i][j]`.
    pub fn from_fn(
        dim: usize,
        names: Option<Vec<String>>,
        f: impl Fn(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut flat = Vec::with_capacity(dim * dim * dim);
        for k in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    flat.push(f(k, i, j));
                }
            }
        }
        Self::new(dim, flat, names)
    }

    /// The abelian algebra of dimension `dim`.
    pub fn abelian(dim: usize) -> Result<Self> {
        Self::new(dim, vec![0.0; dim * dim * dim], None)?.validate()
    }

    /// `su(2) ≅ (R³, ×)`: `C[k][i][j] = ε_{ijk}`, basis named `e1, e2, e3`.
    pub fn su2() -> Self {
        Self::from_fn(3, Some(numbered("e", 3)), |k, i, j| levi_civita(i, j, k))
            .and_then(Self::validate)
            .expect("su(2) constants are a valid Lie algebra")
    }

    /// Checks Jacobi and marks the algebra as validated.
    pub fn validate(mut self) -> Result<Self> {
        let defect = self.jacobi_defect();
        let limit = self.jacobi_tolerance();
        if defect > limit {
            return Err(Error::Validation(format!(
                "Jacobi defect {defect:e} exceeds {limit:e}"
            )));
        }
        self.validated = true;
        Ok(self)
    }

    /// Threshold applied by [`LieAlgebra::validate`].
    pub fn jacobi_tolerance(&self) -> f64 {
        tolerance::JACOBI_REL * (1.0 + self.max_abs_constant()).powi(3) * tolerance::factor()
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `C[k][i][j]`.
    pub fn c(&self, k: usize, i: usize, j: usize) -> f64 {
        self.constants[idx(self.dim, k, i, j)]
    }

    pub fn constants(&self) -> &[f64] {
        &self.constants
    }

    pub fn constants_nested(&self) -> Vec<Vec<Vec<f64>>> {
        let n = self.dim;
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|i| (0..n).map(|j| self.c(k, i, j)).collect())
                    .collect()
            })
            .collect()
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    /// Display name of basis vector `i`, falling back to `{prefix}{i+1}`.
    pub fn basis_name(&self, i: usize, prefix: &str) -> String {
        match &self.names {
            Some(names) => names[i].clone(),
            None => format!("{prefix}{}", i + 1),
        }
    }

    pub fn max_abs_constant(&self) -> f64 {
        self.constants.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `[x, y]_k = Σ C[k][i][j] x^i y^j`.
    pub fn bracket(&self, x: &AlgebraVector, y: &AlgebraVector) -> Result<AlgebraVector> {
        check_len("bracket (left)", self.dim, x.len())?;
        check_len("bracket (right)", self.dim, y.len())?;
        Ok(AlgebraVector(self.bracket_raw(&x.0, &y.0)))
    }

    pub(crate) fn bracket_raw(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for (k, o) in out.iter_mut().enumerate() {
            let plane = &self.constants[k * n * n..(k + 1) * n * n];
            let mut acc = 0.0;
            for (i, xi) in x.iter().enumerate() {
                if *xi == 0.0 {
                    continue;
                }
                let row = &plane[i * n..(i + 1) * n];
                acc += xi * row.iter().zip(y).map(|(c, yj)| c * yj).sum::<f64>();
            }
            *o = acc;
        }
        out
    }

    /// Coadjoint action `⟨ad*_ξ μ, ζ⟩ = −⟨μ, [ξ, ζ]⟩`.
    pub fn ad_star(&self, xi: &AlgebraVector, mu: &DualVector) -> Result<DualVector> {
        check_len("ad_star (algebra)", self.dim, xi.len())?;
        check_len("ad_star (dual)", self.dim, mu.len())?;
        Ok(DualVector(self.ad_star_raw(&xi.0, &mu.0)))
    }

    pub(crate) fn ad_star_raw(&self, xi: &[f64], mu: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for (k, mk) in mu.iter().enumerate() {
            if *mk == 0.0 {
                continue;
            }
            for (i, xii) in xi.iter().enumerate() {
                let w = xii * mk;
                if w == 0.0 {
                    continue;
                }
                let row = &self.constants[idx(n, k, i, 0)..idx(n, k, i, 0) + n];
                for (o, c) in out.iter_mut().zip(row) {
                    *o -= c * w;
                }
            }
        }
        out
    }

    /// Largest max-norm of the Jacobiator over basis triples.
    pub fn jacobi_defect(&self) -> f64 {
        let n = self.dim;
        // nested[q][i][j][l] = [e_i, [e_j, e_l]]_q
        let nested = |q: usize, i: usize, j: usize, l: usize| -> f64 {
            (0..n).map(|p| self.c(p, j, l) * self.c(q, i, p)).sum()
        };
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    for q in 0..n {
                        let v = nested(q, i, j, l) + nested(q, j, l, i) + nested(q, l, i, j);
                        worst = worst.max(v.abs());
                    }
                }
            }
        }
        worst
    }

    /// Lie-Poisson bracket `⟨μ, [∂H, ∂F]⟩`.
    pub fn lie_poisson_bracket(
        &self,
        mu: &DualVector,
        grad_h: &AlgebraVector,
        grad_f: &AlgebraVector,
    ) -> Result<f64> {
        check_len("Lie-Poisson bracket (dual)", self.dim, mu.len())?;
        Ok(mu.pair(&self.bracket(grad_h, grad_f)?))
    }

    /// Lie-Poisson vector field: `ad*_{∂H} μ` (right) or its negation (left).
    pub fn lie_poisson_rhs(
        &self,
        mu: &DualVector,
        grad_h: &AlgebraVector,
        convention: Convention,
    ) -> Result<DualVector> {
        let v = self.ad_star(grad_h, mu)?;
        Ok(match convention {
            Convention::Right => v,
            Convention::Left => v.scaled(-1.0),
        })
    }

    /// Coadjoint-orbit two-form evaluated on `ad*_{ξ1} μ, ad*_{ξ2} μ`.
    pub fn kks(&self, mu: &DualVector, xi1: &AlgebraVector, xi2: &AlgebraVector) -> Result<f64> {
        check_len("KKS form (dual)", self.dim, mu.len())?;
        Ok(mu.pair(&self.bracket(xi1, xi2)?))
    }

    /// Canonical one-form and two-form of the right-trivialized cotangent
    /// bundle, evaluated on right-invariant fields with generators
    /// `v1 = (m̂1, x1)` and `v2 = (m̂2, x2)` at base point `m`.
    ///
    /// Returns `(θ(v1), Ω(v1, v2))` with
    /// `Ω = ⟨m̂2, x1⟩ − ⟨m̂1, x2⟩ + ⟨m, [x1, x2]⟩`.
    pub fn trivialized_forms(
        &self,
        m: &DualVector,
        v1: (&DualVector, &AlgebraVector),
        v2: (&DualVector, &AlgebraVector),
    ) -> Result<(f64, f64)> {
        check_len("trivialized forms (base)", self.dim, m.len())?;
        check_len("trivialized forms (m̂1)", self.dim, v1.0.len())?;
        check_len("trivialized forms (m̂2)", self.dim, v2.0.len())?;
        let theta = m.pair(v1.1);
        let omega = v2.0.pair(v1.1) - v1.0.pair(v2.1) + m.pair(&self.bracket(v1.1, v2.1)?);
        Ok((theta, omega))
    }
}

fn idx(n: usize, k: usize, i: usize, j: usize) -> usize {
    (k * n + i) * n + j
}

fn antisymmetry_defect(n: usize, c: &[f64]) -> (f64, (usize, usize, usize)) {
    let mut worst = (0.0, (0, 0, 0));
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let d = (c[idx(n, k, i, j)] + c[idx(n, k, j, i)]).abs();
                if d > worst.0 {
                    worst = (d, (k, i, j));
                }
            }
        }
    }
    worst
}

/// `ε_{ijk}` for indices in `0..3`.
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

pub(crate) fn numbered(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}
