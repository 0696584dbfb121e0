//! Formula audit: compares a set of closed-form matched-pair formulas
//! against the canonical transposes of a reference pair on seeded samples.
//!
//! Lines and what they compare:
//!
//! * `▷`, `◁`: candidate actions against the reference tensors.
//! * `⋆◁`, `⋆▷`, `𝔞*`, `𝔟*`: each candidate dual map against the transpose of
//!   the candidate's own actions (the pairing identity).
//! * `ad-*`: candidate coadjoint formula against the reference double.
//! * `<lp>(μ̇)`, `<lp>(ν̇)`: candidate Lie-Poisson right-hand side against the
//!   reference double with the right convention.
//! * `<lp> energy`, `ad-* energy`: `⟨ṗ, ∇H⟩`, which vanishes for any
//!   Hamiltonian vector field.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matched_pair::{DoubleAlgebra, DoubleVector, DualPoint, MatchedPair};
use crate::rng::{normal_vec, seeded};
use crate::tolerance;

/// Closed-form expressions for a matched pair's actions, dual maps and dynamics.
///
/// Arguments are coordinate slices: `eta`, `xi` in `h`, `g`; `mu`, `nu` in `g*`, `h*`.
pub trait FormulaSet {
    fn label(&self) -> &str;
    /// `(dim g, dim h)`.
    fn dims(&self) -> (usize, usize);
    /// Name used for the Lie-Poisson lines.
    fn lp_label(&self) -> &str {
        "LP"
    }
    /// `η ▷ ξ ∈ g`
    fn left_act(&self, eta: &[f64], xi: &[f64]) -> Vec<f64>;
    /// `η ◁ ξ ∈ h`
    fn right_act(&self, eta: &[f64], xi: &[f64]) -> Vec<f64>;
    /// `μ ⋆◁ η ∈ g*`
    fn co_left_act(&self, mu: &[f64], eta: &[f64]) -> Vec<f64>;
    /// `ξ ⋆▷ ν ∈ h*`
    fn co_right_act(&self, xi: &[f64], nu: &[f64]) -> Vec<f64>;
    /// `𝔞*_η ν ∈ g*`
    fn a_star(&self, eta: &[f64], nu: &[f64]) -> Vec<f64>;
    /// `𝔟*_ξ μ ∈ h*`
    fn b_star(&self, xi: &[f64], mu: &[f64]) -> Vec<f64>;
    /// Coadjoint action of the double.
    fn double_ad_star(&self, x: &DoubleVector, p: &DualPoint) -> DualPoint;
    /// Lie-Poisson right-hand side at `p` with `grad = ∇H(p)`.
    fn lp_rhs(&self, p: &DualPoint, grad: &DoubleVector) -> DualPoint;
}

/// The canonical formulas of a matched pair: transposes of its tensors and
/// the coadjoint action of its double (right convention).
#[derive(Debug, Clone)]
pub struct CanonicalForms<'a> {
    pair: &'a MatchedPair,
    double: DoubleAlgebra,
    label: String,
}

impl<'a> CanonicalForms<'a> {
    pub fn new(pair: &'a MatchedPair, label: impl Into<String>) -> Result<Self> {
        Ok(Self {
            pair,
            double: pair.build_double()?,
            label: label.into(),
        })
    }
}

impl FormulaSet for CanonicalForms<'_> {
    fn label(&self) -> &str {
        &self.label
    }

    fn dims(&self) -> (usize, usize) {
        (self.pair.n(), self.pair.m())
    }

    fn left_act(&self, eta: &[f64], xi: &[f64]) -> Vec<f64> {
        self.pair.left_raw(eta, xi)
    }

    fn right_act(&self, eta: &[f64], xi: &[f64]) -> Vec<f64> {
        self.pair.right_raw(eta, xi)
    }

    fn co_left_act(&self, mu: &[f64], eta: &[f64]) -> Vec<f64> {
        self.pair.co_left_raw(mu, eta)
    }

    fn co_right_act(&self, xi: &[f64], nu: &[f64]) -> Vec<f64> {
        self.pair.co_right_raw(xi, nu)
    }

    fn a_star(&self, eta: &[f64], nu: &[f64]) -> Vec<f64> {
        self.pair.a_star_raw(eta, nu)
    }

    fn b_star(&self, xi: &[f64], mu: &[f64]) -> Vec<f64> {
        self.pair.b_star_raw(xi, mu)
    }

    fn double_ad_star(&self, x: &DoubleVector, p: &DualPoint) -> DualPoint {
        let r = self.double.lp_rhs_flat(&p.to_flat(), &x.to_flat(), 1.0);
        DualPoint::from_flat(&r, self.pair.n())
    }

    fn lp_rhs(&self, p: &DualPoint, grad: &DoubleVector) -> DualPoint {
        self.double_ad_star(grad, p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AuditStatus {
    Match,
    Mismatch,
}

impl fmt::Display for AuditStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Match => "MATCH",
            Self::Mismatch => "MISMATCH",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditLine {
    pub name: String,
    pub status: AuditStatus,
    /// Largest absolute deviation over all samples.
    pub max_deviation: f64,
    /// Inputs at which the largest deviation occurred.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    /// Compatibility failure of the candidate actions, on action lines.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compat: Option<CompatNote>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatNote {
    /// Basis triple, e.g. `(f3, e1, e2)`.
    pub triple: String,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub reference: String,
    pub candidate: String,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub lines: Vec<AuditLine>,
}

impl AuditReport {
    pub fn line(&self, name: &str) -> Option<&AuditLine> {
        self.lines.iter().find(|l| l.name == name)
    }

    pub fn all_match(&self) -> bool {
        self.lines.iter().all(|l| l.status == AuditStatus::Match)
    }

    pub fn render_text(&self) -> String {
        let mut out = format!(
            "audit of {} against {} ({} samples, seed {}, tolerance {:e})\n",
            self.candidate, self.reference, self.samples, self.seed, self.tolerance
        );
        let width = self
            .lines
            .iter()
            .map(|l| l.name.chars().count())
            .max()
            .unwrap_or(0);
        for l in &self.lines {
            let pad = width - l.name.chars().count();
            out.push_str(&format!(
                "{}{}  {:<8}  max deviation {:.3e}",
                l.name,
                " ".repeat(pad),
                l.status.to_string(),
                l.max_deviation
            ));
            if let Some(c) = &l.compat {
                out.push_str(&format!(
                    "  compatibility fails at {} (magnitude {:.6})",
                    c.triple, c.magnitude
                ));
            }
            if l.status == AuditStatus::Mismatch {
                if let Some(w) = &l.witness {
                    out.push_str(&format!("  at {w}"));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

struct Tracker {
    name: String,
    max: f64,
    witness: Option<String>,
}

impl Tracker {
    fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            max: 0.0,
            witness: None,
        }
    }

    fn record(&mut self, dev: f64, witness: impl FnOnce() -> String) {
        let dev = if dev.is_nan() { f64::INFINITY } else { dev };
        if dev > self.max || self.witness.is_none() {
            if dev > self.max {
                self.max = dev;
            }
            self.witness = Some(witness());
        }
    }

    fn finish(self, tol: f64) -> AuditLine {
        AuditLine {
            name: self.name,
            status: if self.max <= tol {
                AuditStatus::Match
            } else {
                AuditStatus::Mismatch
            },
            max_deviation: self.max,
            witness: self.witness,
            compat: None,
        }
    }
}

fn diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Runs every audit line on `samples` seeded standard-normal inputs.
pub fn audit_formulas(
    reference: &MatchedPair,
    candidate: &dyn FormulaSet,
    samples: usize,
    seed: u64,
) -> Result<AuditReport> {
    let (n, m) = (reference.n(), reference.m());
    if candidate.dims() != (n, m) {
        return Err(Error::Input(format!(
            "candidate dimensions {:?} differ from reference ({n}, {m})",
            candidate.dims()
        )));
    }
    if samples == 0 {
        return Err(Error::Input("audit needs at least one sample".into()));
    }
    let canonical = CanonicalForms::new(reference, "reference")?;
    let tol = tolerance::AUDIT_MATCH * tolerance::factor();
    let lp = candidate.lp_label().to_string();

    let mut left = Tracker::new("▷");
    let mut right = Tracker::new("◁");
    let mut co_left = Tracker::new("⋆◁");
    let mut co_right = Tracker::new("⋆▷");
    let mut a_star = Tracker::new("𝔞*");
    let mut b_star = Tracker::new("𝔟*");
    let mut ad = Tracker::new("ad-*");
    let mut lp_mu = Tracker::new(format!("{lp}(μ̇)"));
    let mut lp_nu = Tracker::new(format!("{lp}(ν̇)"));
    let mut lp_energy = Tracker::new(format!("{lp} energy"));
    let mut ad_energy = Tracker::new("ad-* energy");

    let mut rng = seeded(seed);
    for _ in 0..samples {
        let xi = normal_vec(&mut rng, n);
        let eta = normal_vec(&mut rng, m);
        let mu = normal_vec(&mut rng, n);
        let nu = normal_vec(&mut rng, m);
        let gx = normal_vec(&mut rng, n);
        let gy = normal_vec(&mut rng, m);

        left.record(
            diff(
                &candidate.left_act(&eta, &xi),
                &canonical.left_act(&eta, &xi),
            ),
            || format!("η={}, ξ={}", fmt_vec(&eta), fmt_vec(&xi)),
        );
        right.record(
            diff(
                &candidate.right_act(&eta, &xi),
                &canonical.right_act(&eta, &xi),
            ),
            || format!("η={}, ξ={}", fmt_vec(&eta), fmt_vec(&xi)),
        );

        let exp_co_left: Vec<f64> = (0..n)
            .map(|i| dot(&mu, &candidate.left_act(&eta, &unit(n, i))))
            .collect();
        co_left.record(
            diff(&candidate.co_left_act(&mu, &eta), &exp_co_left),
            || format!("μ={}, η={}", fmt_vec(&mu), fmt_vec(&eta)),
        );
        let exp_co_right: Vec<f64> = (0..m)
            .map(|a| dot(&nu, &candidate.right_act(&unit(m, a), &xi)))
            .collect();
        co_right.record(
            diff(&candidate.co_right_act(&xi, &nu), &exp_co_right),
            || format!("ξ={}, ν={}", fmt_vec(&xi), fmt_vec(&nu)),
        );
        let exp_a: Vec<f64> = (0..n)
            .map(|i| dot(&nu, &candidate.right_act(&eta, &unit(n, i))))
            .collect();
        a_star.record(diff(&candidate.a_star(&eta, &nu), &exp_a), || {
            format!("η={}, ν={}", fmt_vec(&eta), fmt_vec(&nu))
        });
        let exp_b: Vec<f64> = (0..m)
            .map(|a| dot(&mu, &candidate.left_act(&unit(m, a), &xi)))
            .collect();
        b_star.record(diff(&candidate.b_star(&xi, &mu), &exp_b), || {
            format!("ξ={}, μ={}", fmt_vec(&xi), fmt_vec(&mu))
        });

        let p = DualPoint::new(mu.clone(), nu.clone());
        let grad = DoubleVector::new(gx.clone(), gy.clone());
        let point = || {
            format!(
                "μ={}, ν={}, X={}, Y={}",
                fmt_vec(&mu),
                fmt_vec(&nu),
                fmt_vec(&gx),
                fmt_vec(&gy)
            )
        };

        let cand_ad = candidate.double_ad_star(&grad, &p);
        let ref_ad = canonical.double_ad_star(&grad, &p);
        ad.record(diff(&cand_ad.to_flat(), &ref_ad.to_flat()), point);
        ad_energy.record(cand_ad.pair(&grad).abs(), point);

        let cand_lp = candidate.lp_rhs(&p, &grad);
        lp_mu.record(diff(cand_lp.mu.as_slice(), ref_ad.mu.as_slice()), point);
        lp_nu.record(diff(cand_lp.nu.as_slice(), ref_ad.nu.as_slice()), point);
        lp_energy.record(cand_lp.pair(&grad).abs(), point);
    }

    let compat = candidate_compat(reference, candidate)?;
    let mut lines: Vec<AuditLine> = [
        left, right, co_left, co_right, a_star, b_star, ad, lp_mu, lp_nu, lp_energy, ad_energy,
    ]
    .into_iter()
    .map(|t| t.finish(tol))
    .collect();
    if let Some(note) = compat {
        for line in lines.iter_mut().take(2) {
            if line.status == AuditStatus::Mismatch {
                line.compat = Some(note.clone());
            }
        }
    }

    Ok(AuditReport {
        reference: reference_label(reference),
        candidate: candidate.label().to_string(),
        samples,
        seed,
        tolerance: tol,
        lines,
    })
}

fn reference_label(pair: &MatchedPair) -> String {
    format!(
        "{}-dim ⋈ {}-dim {}",
        pair.n(),
        pair.m(),
        if pair.is_validated() {
            "(validated)"
        } else {
            "(unvalidated)"
        }
    )
}

/// Compatibility of the candidate's actions, read off on basis vectors.
fn candidate_compat(
    reference: &MatchedPair,
    candidate: &dyn FormulaSet,
) -> Result<Option<CompatNote>> {
    let (n, m) = (reference.n(), reference.m());
    let tensors = MatchedPair::from_fn(
        reference.g().clone(),
        reference.h().clone(),
        |k, a, i| candidate.left_act(&unit(m, a), &unit(n, i))[k],
        |b, a, i| candidate.right_act(&unit(m, a), &unit(n, i))[b],
    )?;
    let defect = tensors.compat_defect();
    Ok(defect.witness.map(|w| CompatNote {
        triple: w.to_string(),
        magnitude: defect.d1.max(defect.d2),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sl2c::{sl2c_derived, Sl2cPrintedForms};

    #[test]
    fn canonical_forms_audit_clean() {
        let mp = sl2c_derived();
        let canon = CanonicalForms::new(&mp, "sl2c_derived").unwrap();
        let report = audit_formulas(&mp, &canon, 50, 1).unwrap();
        assert!(report.all_match(), "{}", report.render_text());
        assert!(report.lines.iter().all(|l| l.compat.is_none()));
    }

    #[test]
    fn printed_forms_statuses() {
        let mp = sl2c_derived();
        let report = audit_formulas(&mp, &Sl2cPrintedForms, 100, 42).unwrap();
        let status = |name: &str| report.line(name).unwrap().status;
        assert_eq!(status("▷"), AuditStatus::Match);
        assert_eq!(status("◁"), AuditStatus::Mismatch);
        assert_eq!(status("⋆◁"), AuditStatus::Mismatch);
        assert_eq!(status("⋆▷"), AuditStatus::Match);
        assert_eq!(status("𝔞*"), AuditStatus::Match);
        assert_eq!(status("𝔟*"), AuditStatus::Mismatch);
        assert_eq!(status("ad-*"), AuditStatus::Mismatch);
        assert_eq!(status("LPESL(μ̇)"), AuditStatus::Mismatch);
        assert_eq!(status("LPESL(ν̇)"), AuditStatus::Mismatch);
        assert_eq!(status("LPESL energy"), AuditStatus::Mismatch);
        assert_eq!(status("ad-* energy"), AuditStatus::Mismatch);

        let note = report.line("◁").unwrap().compat.clone().unwrap();
        assert_eq!(note.triple, "(f3, e1, e2)");
        assert!((note.magnitude - 4.0).abs() <= 1e-12);
    }

    #[test]
    fn audit_is_deterministic_and_checks_inputs() {
        let mp = sl2c_derived();
        let a = audit_formulas(&mp, &Sl2cPrintedForms, 20, 9).unwrap();
        let b = audit_formulas(&mp, &Sl2cPrintedForms, 20, 9).unwrap();
        assert_eq!(a, b);
        assert!(audit_formulas(&mp, &Sl2cPrintedForms, 0, 9).is_err());
        let text = a.render_text();
        assert!(text.contains("MISMATCH") && text.contains("(f3, e1, e2)"));
        assert_eq!(a.to_json()["lines"][0]["status"], "MATCH");
    }
}
