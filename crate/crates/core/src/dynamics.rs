//! Hamiltonian and Lagrangian specifications, the Legendre transform, and
//! fixed-step RK4 integration of matched Lie-Poisson / Euler-Poincaré flows
//! with invariant monitoring.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::lie::{AlgebraVector, Convention};
use crate::matched_pair::{DoubleAlgebra, DoubleVector, DualPoint, MatchedPair};
use crate::tolerance;

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A Hamiltonian on the flat dual coordinates `z = (μ, ν)`.
#[derive(Clone)]
pub enum Hamiltonian {
    /// `H(z) = ½ zᵀ Q z + bᵀ z` with symmetric `Q`.
    Quadratic { q: DMatrix<f64>, b: DVector<f64> },
    /// Arbitrary scalar function; gradients by central differences.
    Blackbox { dim: usize, f: ScalarFn },
}

impl fmt::Debug for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hamiltonian::Quadratic { q, b } => f
                .debug_struct("Quadratic")
                .field("q", q)
                .field("b", b)
                .finish(),
            Hamiltonian::Blackbox { dim, .. } => f
                .debug_struct("Blackbox")
                .field("dim", dim)
                .finish_non_exhaustive(),
        }
    }
}

impl Hamiltonian {
    pub fn quadratic(q: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if !q.is_square() {
            return Err(Error::Input(format!(
                "Hamiltonian matrix must be square, got {}×{}",
                q.nrows(),
                q.ncols()
            )));
        }
        check_len("Hamiltonian linear term", q.nrows(), b.len())?;
        if q.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Input("non-finite Hamiltonian coefficient".into()));
        }
        let asym = (&q - q.transpose()).amax();
        let limit = tolerance::SYMMETRY_REL * (1.0 + q.amax()) * tolerance::factor();
        if asym > limit {
            return Err(Error::Validation(format!(
                "Hamiltonian matrix is not symmetric (defect {asym:e})"
            )));
        }
        let q = (&q + q.transpose()) * 0.5;
        Ok(Hamiltonian::Quadratic { q, b })
    }

    /// `H = ½ |z|²` on `dim` coordinates.
    pub fn identity(dim: usize) -> Self {
        Hamiltonian::Quadratic {
            q: DMatrix::identity(dim, dim),
            b: DVector::zeros(dim),
        }
    }

    pub fn blackbox(dim: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Hamiltonian::Blackbox {
            dim,
            f: Arc::new(f),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Hamiltonian::Quadratic { q, .. } => q.nrows(),
            Hamiltonian::Blackbox { dim, .. } => *dim,
        }
    }

    pub fn value(&self, z: &[f64]) -> Result<f64> {
        check_len("Hamiltonian argument", self.dim(), z.len())?;
        let v = match self {
            Hamiltonian::Quadratic { q, b } => {
                let zv = DVector::from_column_slice(z);
                0.5 * zv.dot(&(q * &zv)) + b.dot(&zv)
            }
            Hamiltonian::Blackbox { f, .. } => f(z),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Input(format!(
                "Hamiltonian value is not finite at {z:?}"
            )))
        }
    }

    /// `Qz + b` exactly for quadratic specs; central differences with step
    /// `1e-6 · (1 + |z_i|)` otherwise.
    pub fn gradient(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_len("Hamiltonian argument", self.dim(), z.len())?;
        match self {
            Hamiltonian::Quadratic { q, b } => {
                let zv = DVector::from_column_slice(z);
                Ok((q * zv + b).as_slice().to_vec())
            }
            Hamiltonian::Blackbox { f, .. } => {
                let mut probe = z.to_vec();
                let mut grad = Vec::with_capacity(z.len());
                for i in 0..z.len() {
                    let h = 1e-6 * (1.0 + z[i].abs());
                    probe[i] = z[i] + h;
                    let up = f(&probe);
                    probe[i] = z[i] - h;
                    let down = f(&probe);
                    probe[i] = z[i];
                    if !up.is_finite() || !down.is_finite() {
                        return Err(Error::Input(format!(
                            "Hamiltonian value is not finite near {z:?}"
                        )));
                    }
                    grad.push((up - down) / (2.0 * h));
                }
                Ok(grad)
            }
        }
    }
}

/// Quadratic Lagrangian `L = ½ ξᵀ M_g ξ + ½ ηᵀ M_h η`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lagrangian {
    m_g: DMatrix<f64>,
    m_h: DMatrix<f64>,
    inv_g: DMatrix<f64>,
    inv_h: DMatrix<f64>,
}

impl Lagrangian {
    /// Requires symmetric positive-definite metric blocks.
    pub fn new(m_g: DMatrix<f64>, m_h: DMatrix<f64>) -> Result<Self> {
        let inv_g = spd_inverse(&m_g, "M_g")?;
        let inv_h = spd_inverse(&m_h, "M_h")?;
        Ok(Self {
            m_g: (&m_g + m_g.transpose()) * 0.5,
            m_h: (&m_h + m_h.transpose()) * 0.5,
            inv_g,
            inv_h,
        })
    }

    pub fn identity(n: usize, m: usize) -> Self {
        Self {
            m_g: DMatrix::identity(n, n),
            m_h: DMatrix::identity(m, m),
            inv_g: DMatrix::identity(n, n),
            inv_h: DMatrix::identity(m, m),
        }
    }

    /// Recovers the metric from a Hamiltonian `½ zᵀ Q z` whose `Q` is
    /// block-diagonal over `(n, m)`, i.e. the inverse Legendre transform.
    pub fn from_hamiltonian(h: &Hamiltonian, n: usize, m: usize) -> Result<Self> {
        let Hamiltonian::Quadratic { q, b } = h else {
            return Err(Error::Input(
                "only quadratic Hamiltonians have a Lagrangian counterpart".into(),
            ));
        };
        check_len("Hamiltonian dimension", n + m, q.nrows())?;
        if b.amax() != 0.0 {
            return Err(Error::Degenerate(
                "a linear term has no quadratic Lagrangian counterpart".into(),
            ));
        }
        if n > 0 && m > 0 && q.view((0, n), (n, m)).amax() != 0.0 {
            return Err(Error::Degenerate(
                "Hamiltonian couples g* and h* blocks; the metric must be block-diagonal".into(),
            ));
        }
        let qg = q.view((0, 0), (n, n)).into_owned();
        let qh = q.view((n, n), (m, m)).into_owned();
        let m_g = spd_inverse(&qg, "Q_g")?;
        let m_h = spd_inverse(&qh, "Q_h")?;
        Self::new(m_g, m_h)
    }

    pub fn m_g(&self) -> &DMatrix<f64> {
        &self.m_g
    }

    pub fn m_h(&self) -> &DMatrix<f64> {
        &self.m_h
    }

    pub(crate) fn check_dims(&self, n: usize, m: usize) -> Result<()> {
        check_len("metric M_g", n, self.m_g.nrows())?;
        check_len("metric M_h", m, self.m_h.nrows())
    }

    /// `(μ, ν) = (M_g ξ, M_h η)`.
    pub fn momenta(&self, xi: &AlgebraVector, eta: &AlgebraVector) -> Result<DualPoint> {
        check_len("velocity (g)", self.m_g.nrows(), xi.len())?;
        check_len("velocity (h)", self.m_h.nrows(), eta.len())?;
        let mu = &self.m_g * DVector::from_column_slice(&xi.0);
        let nu = &self.m_h * DVector::from_column_slice(&eta.0);
        Ok(DualPoint::new(
            mu.as_slice().to_vec(),
            nu.as_slice().to_vec(),
        ))
    }

    /// `(ξ, η) = (M_g⁻¹ μ, M_h⁻¹ ν)`.
    pub fn velocities(&self, p: &DualPoint) -> Result<DoubleVector> {
        check_len("momentum (g*)", self.inv_g.nrows(), p.mu.len())?;
        check_len("momentum (h*)", self.inv_h.nrows(), p.nu.len())?;
        let xi = &self.inv_g * DVector::from_column_slice(&p.mu.0);
        let eta = &self.inv_h * DVector::from_column_slice(&p.nu.0);
        Ok(DoubleVector::new(
            xi.as_slice().to_vec(),
            eta.as_slice().to_vec(),
        ))
    }

    pub fn value(&self, xi: &AlgebraVector, eta: &AlgebraVector) -> Result<f64> {
        let p = self.momenta(xi, eta)?;
        Ok(0.5 * (p.mu.pair(xi) + p.nu.pair(eta)))
    }

    /// Total energy `⟨μ, ξ⟩ + ⟨ν, η⟩ − L` at momenta `p`.
    pub fn energy_at_momenta(&self, p: &DualPoint) -> Result<f64> {
        let v = self.velocities(p)?;
        Ok(0.5 * p.pair(&v))
    }

    /// Fiber-derivative inverse: `Q = diag(M_g⁻¹, M_h⁻¹)`, `b = 0`.
    pub fn legendre(&self) -> Hamiltonian {
        let (n, m) = (self.inv_g.nrows(), self.inv_h.nrows());
        let mut q = DMatrix::zeros(n + m, n + m);
        q.view_mut((0, 0), (n, n)).copy_from(&self.inv_g);
        q.view_mut((n, n), (m, m)).copy_from(&self.inv_h);
        Hamiltonian::Quadratic {
            q,
            b: DVector::zeros(n + m),
        }
    }
}

fn spd_inverse(m: &DMatrix<f64>, label: &str) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::Input(format!("{label} must be square")));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input(format!("{label} has non-finite entries")));
    }
    let asym = (m - m.transpose()).amax();
    let limit = tolerance::SYMMETRY_REL * (1.0 + m.amax()) * tolerance::factor();
    if asym > limit {
        return Err(Error::Validation(format!(
            "{label} is not symmetric (defect {asym:e})"
        )));
    }
    let sym = (m + m.transpose()) * 0.5;
    let chol = sym
        .cholesky()
        .ok_or_else(|| Error::Degenerate(format!("{label} is not positive definite")))?;
    let inv = chol.inverse();
    if inv.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate(format!("{label} is singular")));
    }
    Ok(inv)
}

/// A named scalar function monitored along a trajectory.
#[derive(Clone)]
pub struct Invariant {
    name: String,
    f: Arc<dyn Fn(&DualPoint) -> f64 + Send + Sync>,
}

impl fmt::Debug for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Invariant")
            .field("name", &self.name)
            .finish()
    }
}

impl Invariant {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&DualPoint) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, p: &DualPoint) -> f64 {
        (self.f)(p)
    }

    /// `|μ|²`
    pub fn mu_sq() -> Self {
        Self::new("mu_sq", |p| p.mu.0.iter().map(|v| v * v).sum())
    }

    /// `|ν|²`, a Casimir of semidirect products with abelian `h`.
    pub fn nu_sq() -> Self {
        Self::new("nu_sq", |p| p.nu.0.iter().map(|v| v * v).sum())
    }

    /// `μ · ν` (requires `dim g = dim h`).
    pub fn mu_dot_nu() -> Self {
        Self::new("mu_dot_nu", |p| {
            p.mu.0.iter().zip(&p.nu.0).map(|(a, b)| a * b).sum()
        })
    }

    /// Quadratic Casimir `pᵀ K⁻¹ p` from the Killing form `K` of the double.
    ///
    /// Fails when the Killing form is degenerate (non-semisimple double).
    pub fn killing(double: &DoubleAlgebra) -> Result<Self> {
        let alg = double.algebra();
        let d = alg.dim();
        let k = DMatrix::from_fn(d, d, |i, j| {
            let mut acc = 0.0;
            for l in 0..d {
                for q in 0..d {
                    acc += alg.c(l, i, q) * alg.c(q, j, l);
                }
            }
            acc
        });
        let svd = k.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smax == 0.0 || smin <= 1e-10 * smax {
            return Err(Error::Input(
                "Killing form of the double is degenerate".into(),
            ));
        }
        let inv = k
            .try_inverse()
            .ok_or_else(|| Error::Input("Killing form is not invertible".into()))?;
        Ok(Self::new("killing", move |p| {
            let z = DVector::from_vec(p.to_flat());
            z.dot(&(&inv * &z))
        }))
    }
}

/// Time series of one invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantSeries {
    pub name: String,
    pub values: Vec<f64>,
}

impl InvariantSeries {
    /// `max_t |I(t) − I(0)| / |I(0)|`, or the absolute deviation when
    /// `I(0)` is zero to machine precision.
    pub fn drift(&self) -> f64 {
        let Some(&first) = self.values.first() else {
            return 0.0;
        };
        let denom = if first.abs() > f64::EPSILON {
            first.abs()
        } else {
            1.0
        };
        self.values
            .iter()
            .fold(0.0_f64, |m, v| m.max((v - first).abs()))
            / denom
    }
}

/// Output of an integration run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    /// Dual points (momenta for Euler-Poincaré runs).
    pub states: Vec<DualPoint>,
    /// `H` first, then user-registered invariants in order.
    pub invariants: Vec<InvariantSeries>,
    pub split: (usize, usize),
}

impl TrajectoryRecord {
    pub fn steps(&self) -> usize {
        self.times.len().saturating_sub(1)
    }

    pub fn final_state(&self) -> &DualPoint {
        self.states.last().expect("trajectory has an initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has an initial time")
    }

    pub fn series(&self, name: &str) -> Option<&InvariantSeries> {
        self.invariants.iter().find(|s| s.name == name)
    }

    pub fn drift(&self, name: &str) -> Option<f64> {
        self.series(name).map(InvariantSeries::drift)
    }

    /// `(name, drift)` for every monitored invariant.
    pub fn drift_summary(&self) -> Vec<(String, f64)> {
        self.invariants
            .iter()
            .map(|s| (s.name.clone(), s.drift()))
            .collect()
    }

    /// Writes `t, mu_1..mu_n, nu_1..nu_m, <invariants...>` with 17
    /// significant digits per value.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let (n, m) = self.split;
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("mu_{i}")));
        header.extend((1..=m).map(|i| format!("nu_{i}")));
        header.extend(self.invariants.iter().map(|s| s.name.clone()));
        writeln!(out, "{}", header.join(","))?;
        for (row, (t, p)) in self.times.iter().zip(&self.states).enumerate() {
            let mut line = format_value(*t);
            for v in p.mu.0.iter().chain(&p.nu.0) {
                line.push(',');
                line.push_str(&format_value(*v));
            }
            for s in &self.invariants {
                line.push(',');
                line.push_str(&format_value(s.values[row]));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn check_grid(dt: f64, t_end: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Input(format!(
            "time step must be positive, got {dt}"
        )));
    }
    if !(t_end.is_finite() && t_end >= dt) {
        return Err(Error::Input(format!(
            "end time must be at least one step (dt = {dt}), got {t_end}"
        )));
    }
    Ok((t_end / dt).round().max(1.0) as usize)
}

fn rk4_step(
    z: &[f64],
    dt: f64,
    f: &mut impl FnMut(&[f64]) -> Result<Vec<f64>>,
) -> Result<Vec<f64>> {
    let axpy =
        |a: f64, x: &[f64]| -> Vec<f64> { z.iter().zip(x).map(|(zi, xi)| zi + a * xi).collect() };
    let k1 = f(z)?;
    let k2 = f(&axpy(0.5 * dt, &k1))?;
    let k3 = f(&axpy(0.5 * dt, &k2))?;
    let k4 = f(&axpy(dt, &k3))?;
    Ok((0..z.len())
        .map(|i| z[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

fn run_fixed_step(
    split: (usize, usize),
    z0: Vec<f64>,
    dt: f64,
    steps: usize,
    mut rhs: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    energy: impl Fn(&DualPoint) -> Result<f64>,
    invariants: &[Invariant],
) -> Result<TrajectoryRecord> {
    let n = split.0;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut series: Vec<InvariantSeries> = std::iter::once("H")
        .chain(invariants.iter().map(Invariant::name))
        .map(|name| InvariantSeries {
            name: name.to_string(),
            values: Vec::with_capacity(steps + 1),
        })
        .collect();

    let mut record = |t: f64, z: &[f64], series: &mut Vec<InvariantSeries>| -> Result<DualPoint> {
        let p = DualPoint::from_flat(z, n);
        series[0].values.push(energy(&p)?);
        for (s, inv) in series[1..].iter_mut().zip(invariants) {
            s.values.push(inv.eval(&p));
        }
        times.push(t);
        Ok(p)
    };

    let mut z = z0;
    states.push(record(0.0, &z, &mut series)?);
    for step in 1..=steps {
        let last_good = (step - 1) as f64 * dt;
        let next = rk4_step(&z, dt, &mut rhs).map_err(|e| match e {
            Error::Integration { .. } => e,
            other => Error::Integration {
                time: last_good,
                reason: other.to_string(),
            },
        })?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration {
                time: last_good,
                reason: "state became non-finite".into(),
            });
        }
        z = next;
        states.push(record(step as f64 * dt, &z, &mut series)?);
    }
    Ok(TrajectoryRecord {
        times,
        states,
        invariants: series,
        split,
    })
}

/// Integrates `ṗ = ±ad*_{∇H(p)} p` on the dual of a validated double with
/// classical RK4. `H` is always monitored first.
pub fn integrate(
    double: &DoubleAlgebra,
    hamiltonian: &Hamiltonian,
    p0: &DualPoint,
    dt: f64,
    t_end: f64,
    convention: Convention,
    invariants: &[Invariant],
) -> Result<TrajectoryRecord> {
    let (n, m) = double.split();
    check_len("initial point (g*)", n, p0.mu.len())?;
    check_len("initial point (h*)", m, p0.nu.len())?;
    check_len("Hamiltonian dimension", n + m, hamiltonian.dim())?;
    if !double.is_validated() {
        return Err(Error::Validation(
            "integration needs a validated double".into(),
        ));
    }
    let steps = check_grid(dt, t_end)?;
    let sign = convention.sign();
    let rhs = |z: &[f64]| -> Result<Vec<f64>> {
        let grad = hamiltonian.gradient(z)?;
        Ok(double.lp_rhs_flat(z, &grad, sign))
    };
    let energy = |p: &DualPoint| hamiltonian.value(&p.to_flat());
    run_fixed_step((n, m), p0.to_flat(), dt, steps, rhs, energy, invariants)
}

/// Integrates the matched Euler-Poincaré equations in momentum coordinates,
/// starting from velocities `(ξ0, η0)`. The monitored `H` is the total energy.
pub fn integrate_ep(
    pair: &MatchedPair,
    lagrangian: &Lagrangian,
    xi0: &AlgebraVector,
    eta0: &AlgebraVector,
    dt: f64,
    t_end: f64,
    invariants: &[Invariant],
) -> Result<TrajectoryRecord> {
    let (n, m) = (pair.n(), pair.m());
    lagrangian.check_dims(n, m)?;
    if !pair.is_validated() {
        return Err(Error::Validation(
            "integration needs a validated matched pair".into(),
        ));
    }
    let steps = check_grid(dt, t_end)?;
    let p0 = lagrangian.momenta(xi0, eta0)?;
    let rhs = |z: &[f64]| -> Result<Vec<f64>> {
        let p = DualPoint::from_flat(z, n);
        Ok(pair
            .euler_poincare_rhs_momenta(&p, lagrangian)?
            .rates
            .to_flat())
    };
    let energy = |p: &DualPoint| lagrangian.energy_at_momenta(p);
    run_fixed_step((n, m), p0.to_flat(), dt, steps, rhs, energy, invariants)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sl2c;

    #[test]
    fn gradient_examples() {
        let h = Hamiltonian::identity(2);
        assert_eq!(h.gradient(&[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);

        let mut b = DVector::zeros(6);
        b[2] = 1.0;
        let lin = Hamiltonian::quadratic(DMatrix::zeros(6, 6), b.clone()).unwrap();
        for z in [[0.0; 6], [1.0, -2.0, 3.0, 0.5, 9.0, -1.0]] {
            assert_eq!(lin.gradient(&z).unwrap(), b.as_slice().to_vec());
        }

        let bb = Hamiltonian::blackbox(1, |z| z[0].sin());
        let g = bb.gradient(&[0.3]).unwrap();
        assert!((g[0] - 0.3_f64.cos()).abs() <= 1e-8);
    }

    #[test]
    fn gradient_errors() {
        let h = Hamiltonian::identity(3);
        assert!(matches!(h.gradient(&[1.0]), Err(Error::Dimension { .. })));
        let bad = Hamiltonian::blackbox(1, |z| 1.0 / z[0].abs().min(0.0));
        assert!(matches!(bad.gradient(&[0.0]), Err(Error::Input(_))));
    }

    #[test]
    fn quadratic_rejects_asymmetric_matrix() {
        let mut q = DMatrix::identity(2, 2);
        q[(0, 1)] = 1.0;
        assert!(Hamiltonian::quadratic(q, DVector::zeros(2)).is_err());
    }

    #[test]
    fn legendre_examples() {
        let id = Lagrangian::identity(3, 3).legendre();
        let Hamiltonian::Quadratic { q, b } = &id else {
            unreachable!()
        };
        assert_eq!(q, &DMatrix::<f64>::identity(6, 6));
        assert_eq!(b.amax(), 0.0);

        let lag = Lagrangian::new(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0])),
            DMatrix::identity(3, 3),
        )
        .unwrap();
        let Hamiltonian::Quadratic { q, .. } = lag.legendre() else {
            unreachable!()
        };
        let expected = [1.0, 0.5, 1.0 / 3.0, 1.0, 1.0, 1.0];
        for i in 0..6 {
            for j in 0..6 {
                let e = if i == j { expected[i] } else { 0.0 };
                assert!((q[(i, j)] - e).abs() <= 1e-15);
            }
        }

        let singular = Lagrangian::new(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.0])),
            DMatrix::identity(3, 3),
        );
        assert!(matches!(singular, Err(Error::Degenerate(_))));
    }

    #[test]
    fn legendre_round_trip() {
        let m_g = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0]);
        let m_h = DMatrix::from_row_slice(2, 2, &[2.0, -0.3, -0.3, 1.0]);
        let lag = Lagrangian::new(m_g, m_h).unwrap();
        let xi = AlgebraVector(vec![0.3, -1.0, 2.0]);
        let eta = AlgebraVector(vec![0.7, 0.1]);
        let p = lag.momenta(&xi, &eta).unwrap();
        let grad = lag.legendre().gradient(&p.to_flat()).unwrap();
        for (g, v) in grad.iter().zip(xi.0.iter().chain(&eta.0)) {
            assert!((g - v).abs() <= 1e-12);
        }
        let e = lag.energy_at_momenta(&p).unwrap();
        assert!((e - lag.value(&xi, &eta).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn lagrangian_from_hamiltonian_inverts_legendre() {
        let lag = Lagrangian::new(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0])),
            DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 1.0, 4.0])),
        )
        .unwrap();
        let back = Lagrangian::from_hamiltonian(&lag.legendre(), 3, 3).unwrap();
        assert!((back.m_g() - lag.m_g()).amax() <= 1e-12);
        assert!((back.m_h() - lag.m_h()).amax() <= 1e-12);

        let mut q = DMatrix::identity(6, 6);
        q[(5, 5)] = 0.0;
        let h = Hamiltonian::quadratic(q, DVector::zeros(6)).unwrap();
        assert!(matches!(
            Lagrangian::from_hamiltonian(&h, 3, 3),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn constant_hamiltonian_gives_constant_trajectory() {
        let d = sl2c::sl2c_derived().build_double().unwrap();
        let h = Hamiltonian::quadratic(DMatrix::zeros(6, 6), DVector::zeros(6)).unwrap();
        let p0 = DualPoint::new(vec![0.3, 1.0, -2.0], vec![0.5, 0.0, 1.5]);
        let traj = integrate(&d, &h, &p0, 0.1, 1.0, Convention::Right, &[]).unwrap();
        assert_eq!(traj.steps(), 10);
        assert!(traj.states.iter().all(|p| *p == p0));
    }

    #[test]
    fn first_step_follows_rhs() {
        let d = sl2c::sl2c_derived().build_double().unwrap();
        let p0 = DualPoint::new(vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]);
        let dt = 1e-3;
        let traj = integrate(
            &d,
            &Hamiltonian::identity(6),
            &p0,
            dt,
            dt,
            Convention::Right,
            &[],
        )
        .unwrap();
        let p1 = traj.final_state().to_flat();
        let predicted = [1.0, 0.0, 0.0, 0.0, 1.0, dt];
        for (a, b) in p1.iter().zip(predicted) {
            assert!((a - b).abs() <= 10.0 * dt * dt);
        }
    }

    #[test]
    fn integrate_validates_inputs() {
        let d = sl2c::sl2c_derived().build_double().unwrap();
        let p0 = DualPoint::new(vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]);
        let h = Hamiltonian::identity(6);
        for (dt, t_end) in [
            (0.0, 1.0),
            (-1.0, 1.0),
            (0.1, 0.0),
            (0.1, 0.05),
            (f64::NAN, 1.0),
        ] {
            assert!(matches!(
                integrate(&d, &h, &p0, dt, t_end, Convention::Right, &[]),
                Err(Error::Input(_))
            ));
        }
        let printed = sl2c::sl2c_printed().build_double().unwrap();
        assert!(matches!(
            integrate(&printed, &h, &p0, 0.1, 1.0, Convention::Right, &[]),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn non_finite_state_reports_last_good_time() {
        let d = sl2c::sl2c_derived().build_double().unwrap();
        // H = exp(30 |z|²) blows the state up quickly
        let h = Hamiltonian::blackbox(6, |z| (30.0 * z.iter().map(|v| v * v).sum::<f64>()).exp());
        let p0 = DualPoint::new(vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]);
        match integrate(&d, &h, &p0, 0.1, 10.0, Convention::Right, &[]) {
            Err(Error::Integration { time, .. }) => assert!((0.0..10.0).contains(&time)),
            other => panic!("expected integration error, got {other:?}"),
        }
    }

    #[test]
    fn ep_zero_state_is_constant() {
        let mp = sl2c::sl2c_derived();
        let lag = Lagrangian::identity(3, 3);
        let zero = AlgebraVector::zeros(3);
        let traj = integrate_ep(&mp, &lag, &zero, &zero, 0.1, 1.0, &[]).unwrap();
        assert!(traj.states.iter().all(|p| p.max_abs() == 0.0));
    }

    #[test]
    fn csv_layout() {
        let d = sl2c::e3_heavytop().build_double().unwrap();
        let p0 = DualPoint::new(vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]);
        let traj = integrate(
            &d,
            &Hamiltonian::identity(6),
            &p0,
            0.5,
            1.0,
            Convention::Right,
            &[Invariant::nu_sq()],
        )
        .unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,mu_1,mu_2,mu_3,nu_1,nu_2,nu_3,H,nu_sq");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0.0000000000000000e0,1.0000000000000000e0,"));
        let parsed: Vec<f64> = lines[2].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(parsed[0], 0.5);
        assert_eq!(parsed.len(), 9);
    }

    #[test]
    fn drift_is_relative_unless_initial_value_vanishes() {
        let s = InvariantSeries {
            name: "x".into(),
            values: vec![2.0, 2.5, 1.0],
        };
        assert_eq!(s.drift(), 0.5);
        let s = InvariantSeries {
            name: "y".into(),
            values: vec![0.0, 1e-9, -3e-9],
        };
        assert_eq!(s.drift(), 3e-9);
    }
}
