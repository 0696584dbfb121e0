use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use mpm_core::dynamics::{Hamiltonian, Invariant};
use mpm_core::matched_pair::DoubleAlgebra;
use mpm_core::nalgebra::{DMatrix, DVector};
use mpm_core::{sl2c, Convention, MatchedPair, TensorDocument};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Lp,
    Ep,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Lp => "lp",
            Mode::Ep => "ep",
        }
    }
}

/// Settings for `simulate`. Every field may come from a JSON config file;
/// command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub pair: Option<String>,
    pub hamiltonian: Option<String>,
    /// `(μ, ν)` in LP mode, velocities `(ξ, η)` in EP mode.
    pub initial: Option<Vec<f64>>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub convention: Option<String>,
    pub mode: Option<Mode>,
    pub invariants: Option<Vec<String>>,
    pub seed: Option<u64>,
    pub out: Option<String>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merged(self, over: RunConfig) -> Self {
        Self {
            pair: over.pair.or(self.pair),
            hamiltonian: over.hamiltonian.or(self.hamiltonian),
            initial: over.initial.or(self.initial),
            dt: over.dt.or(self.dt),
            t_end: over.t_end.or(self.t_end),
            convention: over.convention.or(self.convention),
            mode: over.mode.or(self.mode),
            invariants: over.invariants.or(self.invariants),
            seed: over.seed.or(self.seed),
            out: over.out.or(self.out),
        }
    }

    pub fn resolve(self) -> Result<Resolved> {
        let dt = self.dt.unwrap_or(1e-3);
        let t_end = self.t_end.unwrap_or(1.0);
        if !(dt.is_finite() && dt > 0.0) {
            return Err(anyhow!("--dt must be a positive number, got {dt}"));
        }
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(anyhow!("--t-end must be a positive number, got {t_end}"));
        }
        let convention: Convention = match &self.convention {
            Some(s) => s.parse()?,
            None => Convention::Right,
        };
        Ok(Resolved {
            pair: self.pair.unwrap_or_else(|| "sl2c_derived".into()),
            hamiltonian: self
                .hamiltonian
                .unwrap_or_else(|| "quadratic_identity".into()),
            initial: self.initial,
            dt,
            t_end,
            convention,
            mode: self.mode.unwrap_or(Mode::Lp),
            invariants: self.invariants.unwrap_or_default(),
            seed: self.seed.unwrap_or(0),
            out: self.out.unwrap_or_else(|| "mpm_run".into()),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Resolved {
    pub pair: String,
    pub hamiltonian: String,
    pub initial: Option<Vec<f64>>,
    pub dt: f64,
    pub t_end: f64,
    pub convention: Convention,
    pub mode: Mode,
    pub invariants: Vec<String>,
    pub seed: u64,
    pub out: String,
}

/// Comma- or whitespace-separated reals.
pub fn parse_numbers(s: &str) -> Result<Vec<f64>, String> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect()
}

pub fn parse_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(String::from)
        .collect()
}

/// A built-in pair name or a path to a tensor document. Not validated.
pub fn load_pair(source: &str) -> Result<MatchedPair> {
    if let Some(pair) = sl2c::builtin(source) {
        return Ok(pair);
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(anyhow!(
            "unknown pair {source:?}: not a built-in ({}) and no such file",
            sl2c::BUILTIN_PAIRS.join(", ")
        ));
    }
    let doc = load_document(path)?;
    Ok(doc.to_pair()?)
}

pub fn load_document(path: &Path) -> Result<TensorDocument> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    TensorDocument::from_json(&text)
        .with_context(|| format!("parsing tensor document {}", path.display()))
}

pub const BUILTIN_HAMILTONIANS: [&str; 3] = ["quadratic_identity", "heavy_top", "rigid_body_123"];

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadraticSpec {
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
    #[serde(default)]
    b: Option<Vec<f64>>,
}

/// `H(z) = ½ zᵀQz + bᵀz` from a built-in name or a JSON file `{"Q": .., "b": ..}`.
pub fn load_hamiltonian(source: &str, n: usize, m: usize) -> Result<Hamiltonian> {
    let d = n + m;
    let diag = |entries: &[f64], b: DVector<f64>| -> Result<Hamiltonian> {
        if (n, m) != (3, 3) {
            return Err(anyhow!(
                "built-in Hamiltonian {source:?} needs a 3 + 3 dimensional pair, got {n} + {m}"
            ));
        }
        Ok(Hamiltonian::quadratic(
            DMatrix::from_diagonal(&DVector::from_row_slice(entries)),
            b,
        )?)
    };
    match source {
        "quadratic_identity" => Ok(Hamiltonian::identity(d)),
        "heavy_top" => diag(
            &[1.0, 0.5, 1.0 / 3.0, 0.0, 0.0, 0.0],
            DVector::from_row_slice(&[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
        ),
        "rigid_body_123" => diag(&[1.0, 0.5, 1.0 / 3.0, 0.0, 0.0, 0.0], DVector::zeros(6)),
        path => {
            let path = Path::new(path);
            if !path.exists() {
                return Err(anyhow!(
                    "unknown Hamiltonian {source:?}: not a built-in ({}) and no such file",
                    BUILTIN_HAMILTONIANS.join(", ")
                ));
            }
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let q: QuadraticSpec = serde_json::from_str(&text)
                .with_context(|| format!("parsing Hamiltonian {}", path.display()))?;
            if q.q.len() != d || q.q.iter().any(|r| r.len() != d) {
                return Err(anyhow!("Hamiltonian Q must be {d}×{d}"));
            }
            let b = q.b.unwrap_or_else(|| vec![0.0; d]);
            if b.len() != d {
                return Err(anyhow!("Hamiltonian b must have length {d}"));
            }
            let qm = DMatrix::from_fn(d, d, |i, j| q.q[i][j]);
            Ok(Hamiltonian::quadratic(qm, DVector::from_vec(b))?)
        }
    }
}

pub const BUILTIN_INVARIANTS: [&str; 4] = ["mu_sq", "nu_sq", "mu_dot_nu", "killing"];

/// Named invariants; `H` is always recorded and is skipped here.
pub fn load_invariants(names: &[String], double: &DoubleAlgebra) -> Result<Vec<Invariant>> {
    let mut out = Vec::new();
    for name in names {
        let inv = match name.as_str() {
            "H" => continue,
            "mu_sq" => Invariant::mu_sq(),
            "nu_sq" => Invariant::nu_sq(),
            "mu_dot_nu" => {
                let (n, m) = double.split();
                if n != m {
                    return Err(anyhow!("mu_dot_nu needs dim g = dim h"));
                }
                Invariant::mu_dot_nu()
            }
            "killing" => Invariant::killing(double)?,
            other => {
                return Err(anyhow!(
                    "unknown invariant {other:?}; expected one of {}",
                    BUILTIN_INVARIANTS.join(", ")
                ))
            }
        };
        out.push(inv);
    }
    Ok(out)
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn check_initial(initial: &[f64], d: usize) -> Result<()> {
    if initial.len() != d {
        bail!("--initial needs {d} numbers, got {}", initial.len());
    }
    if initial.iter().any(|v| !v.is_finite()) {
        bail!("--initial must be finite");
    }
    Ok(())
}
