//! Matched pair Lie algebra mechanics.
//!
//! Finite-dimensional real Lie algebras are stored by structure constants.
//! Two algebras acting on each other ([`MatchedPair`]) assemble into a double
//! algebra ([`DoubleAlgebra`]) whose dual carries the matched Lie-Poisson
//! bracket. The [`dynamics`] module integrates the resulting flows with
//! invariant monitoring, and [`sl2c`] realizes `sl(2,C) = su(2) ⋈ K` from
//! 2×2 complex matrices.

#![allow(clippy::needless_range_loop)]

pub mod audit;
pub mod document;
pub mod dynamics;
pub mod error;
pub mod lie;
pub mod matched_pair;
pub mod rng;
pub mod sl2c;
pub mod tolerance;

pub use nalgebra;

pub use audit::{audit_formulas, AuditLine, AuditReport, AuditStatus, CanonicalForms, FormulaSet};
pub use document::{MatrixBasisDocument, TensorDocument};
pub use dynamics::{integrate, integrate_ep, Hamiltonian, Invariant, Lagrangian, TrajectoryRecord};
pub use error::{Error, Result};
pub use lie::{AlgebraVector, Convention, DualVector, LieAlgebra};
pub use matched_pair::{
    CompatDefect, CompatWitness, DoubleAlgebra, DoubleVector, DualPoint, EpRates, MatchedPair,
};
