//! JSON documents for matched-pair tensors and matrix bases.
//!
//! Tensor layout:
//!
//! ```json
//! {"g": {"dim": 3, "C": [[[..]]], "names": ["e1", ..]},
//!  "h": {"dim": 3, "C": [[[..]]]},
//!  "rho": [[[..]]], "sigma": [[[..]]]}
//! ```
//!
//! `C[k][i][j]`, `rho[k][a][i]` and `sigma[b][a][i]` follow the index
//! conventions of [`crate::matched_pair`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::LieAlgebra;
use crate::matched_pair::MatchedPair;
use crate::sl2c::{EmbeddedBasis, Mat2C};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraDocument {
    pub dim: usize,
    #[serde(rename = "C")]
    pub constants: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
}

impl AlgebraDocument {
    pub fn from_algebra(alg: &LieAlgebra) -> Self {
        Self {
            dim: alg.dim(),
            constants: alg.constants_nested(),
            names: alg.names().map(<[String]>::to_vec),
        }
    }

    fn check_shape(&self, what: &str) -> Result<()> {
        check_cube(&self.constants, [self.dim, self.dim, self.dim], what)?;
        if let Some(names) = &self.names {
            if names.len() != self.dim {
                return Err(Error::Input(format!(
                    "{what}: {} names for dimension {}",
                    names.len(),
                    self.dim
                )));
            }
        }
        Ok(())
    }

    /// Largest `|C[k][i][j] + C[k][j][i]|` in the raw data.
    pub fn antisymmetry_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0_f64;
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    worst = worst.max((self.constants[k][i][j] + self.constants[k][j][i]).abs());
                }
            }
        }
        worst
    }

    pub fn to_algebra(&self, what: &str) -> Result<LieAlgebra> {
        self.check_shape(what)?;
        LieAlgebra::from_nested(&self.constants, self.names.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorDocument {
    pub g: AlgebraDocument,
    pub h: AlgebraDocument,
    pub rho: Vec<Vec<Vec<f64>>>,
    pub sigma: Vec<Vec<Vec<f64>>>,
}

impl TensorDocument {
    pub fn from_pair(pair: &MatchedPair) -> Self {
        Self {
            g: AlgebraDocument::from_algebra(pair.g()),
            h: AlgebraDocument::from_algebra(pair.h()),
            rho: pair.rho_nested(),
            sigma: pair.sigma_nested(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        doc.check_shape()?;
        Ok(doc)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    /// Verifies every array has the shape implied by `g.dim` and `h.dim`.
    pub fn check_shape(&self) -> Result<()> {
        self.g.check_shape("g")?;
        self.h.check_shape("h")?;
        let (n, m) = (self.g.dim, self.h.dim);
        check_cube(&self.rho, [n, m, n], "rho")?;
        check_cube(&self.sigma, [m, m, n], "sigma")
    }

    /// Builds the (unvalidated) pair. Rejects non-antisymmetric constants.
    pub fn to_pair(&self) -> Result<MatchedPair> {
        self.check_shape()?;
        let g = self.g.to_algebra("g")?;
        let h = self.h.to_algebra("h")?;
        let flat = |t: &Vec<Vec<Vec<f64>>>| t.iter().flatten().flatten().copied().collect();
        MatchedPair::new(g, h, flat(&self.rho), flat(&self.sigma))
    }
}

fn check_cube(t: &[Vec<Vec<f64>>], shape: [usize; 3], what: &str) -> Result<()> {
    let bad = t.len() != shape[0]
        || t.iter()
            .any(|s| s.len() != shape[1] || s.iter().any(|r| r.len() != shape[2]));
    if bad {
        return Err(Error::Input(format!(
            "{what} must have shape {}×{}×{}",
            shape[0], shape[1], shape[2]
        )));
    }
    if t.iter().flatten().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Input(format!("{what} has non-finite entries")));
    }
    Ok(())
}

/// A 2×2 complex matrix as row-major `[re, im]` pairs, with an optional name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedMatrix {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub matrix: [[[f64; 2]; 2]; 2],
}

/// Matrix bases for `g` and `h`, input to the commutator derivation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixBasisDocument {
    pub g: Vec<NamedMatrix>,
    pub h: Vec<NamedMatrix>,
}

impl MatrixBasisDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_basis(basis: &EmbeddedBasis) -> Self {
        let wrap = |mats: &[Mat2C], names: &Option<Vec<String>>| {
            mats.iter()
                .enumerate()
                .map(|(i, m)| NamedMatrix {
                    name: names.as_ref().map(|n| n[i].clone()),
                    matrix: m.to_pairs(),
                })
                .collect()
        };
        Self {
            g: wrap(&basis.g, &basis.g_names),
            h: wrap(&basis.h, &basis.h_names),
        }
    }

    /// Names are kept only when every matrix of a block has one.
    pub fn to_basis(&self) -> EmbeddedBasis {
        let names =
            |v: &[NamedMatrix]| v.iter().map(|m| m.name.clone()).collect::<Option<Vec<_>>>();
        EmbeddedBasis {
            g: self.g.iter().map(|m| Mat2C::from_pairs(m.matrix)).collect(),
            h: self.h.iter().map(|m| Mat2C::from_pairs(m.matrix)).collect(),
            g_names: names(&self.g),
            h_names: names(&self.h),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sl2c::{derive_actions, sl2c_basis, sl2c_derived};

    #[test]
    fn tensor_round_trip() {
        let mp = sl2c_derived();
        let doc = TensorDocument::from_pair(&mp);
        let back = TensorDocument::from_json(&doc.to_json_pretty()).unwrap();
        let pair = back.to_pair().unwrap().validate().unwrap();
        assert_eq!(pair.rho_nested(), mp.rho_nested());
        assert_eq!(pair.sigma_nested(), mp.sigma_nested());
        assert_eq!(pair.g_name(0), "e1");
    }

    #[test]
    fn shape_and_antisymmetry_errors() {
        let mut doc = TensorDocument::from_pair(&sl2c_derived());
        doc.rho.pop();
        assert!(matches!(doc.check_shape(), Err(Error::Input(_))));

        let mut doc = TensorDocument::from_pair(&sl2c_derived());
        doc.g.constants[2][0][1] = 3.0;
        assert!(doc.g.antisymmetry_defect() >= 1.9);
        assert!(matches!(doc.to_pair(), Err(Error::NotAntisymmetric { .. })));
    }

    #[test]
    fn basis_round_trip_derives_same_pair() {
        let doc = MatrixBasisDocument::from_basis(&sl2c_basis());
        let text = serde_json::to_string(&doc).unwrap();
        let back = MatrixBasisDocument::from_json(&text).unwrap().to_basis();
        let mp = derive_actions(&back).unwrap();
        assert_eq!(mp.h_name(2), "f3");
        assert!(mp.compat_defect().passes());
    }
}
