//! Validation thresholds.
//!
//! Every threshold is relative to a scale `1 + max|input|` and is multiplied
//! by the process-wide factor read from `MPM_TOLERANCE_SCALE` (default 1).

use std::sync::OnceLock;

/// Absolute floor used when nothing larger applies.
pub const ABS_FLOOR: f64 = 1e-12;

/// Antisymmetrization is accepted below this relative asymmetry.
pub const ANTISYMMETRY_REL: f64 = 1e-12;

/// Jacobi defect of a validated algebra, times `(1 + max|C|)^3`.
pub const JACOBI_REL: f64 = 1e-10;

/// Compatibility defect of a validated matched pair, times the pair scale.
pub const COMPAT_REL: f64 = 1e-10;

/// A printed closed form agrees with its canonical counterpart below this.
pub const AUDIT_MATCH: f64 = 1e-10;

/// Symmetry of quadratic forms, relative.
pub const SYMMETRY_REL: f64 = 1e-12;

/// Name of the environment variable scaling every validation tolerance.
pub const SCALE_ENV: &str = "MPM_TOLERANCE_SCALE";

static FACTOR: OnceLock<f64> = OnceLock::new();

/// Multiplier applied to validation tolerances.
///
/// Read once from [`SCALE_ENV`]; unparsable or non-positive values fall back to 1.
pub fn factor() -> f64 {
    *FACTOR.get_or_init(|| {
        std::env::var(SCALE_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|v| v.is_finite() && *v > 0.0)
            .unwrap_or(1.0)
    })
}

/// `1 + max|x|` over a slice.
pub fn scale_of(values: &[f64]) -> f64 {
    1.0 + values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}
