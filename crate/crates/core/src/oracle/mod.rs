//! Independent reference computations.

pub mod adjoint;
pub mod cylinder;
pub mod delta;
pub mod dopri;
pub mod gamma;
pub mod kernel;
pub mod l2;
pub mod mellin;
pub mod ode;
pub mod suite;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("integration step failed at x = {x}")]
    StepFailure { x: f64 },
    #[error("closed form disagrees with direct integration (relative error {relative_error:.3e})")]
    SelfCheckFailed { relative_error: f64 },
    #[error("eigenvalues still move when r_max = {r_max} doubles")]
    TruncationUnstable { r_max: f64 },
    #[error("fit basis is degenerate for lambda = {lambda}")]
    DegenerateBasis { lambda: Complex64 },
    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
    #[error("root finding failed near {near}")]
    RootFindingFailed { near: Complex64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleKind {
    ExactKernel,
    Indicial,
    DeltaIdentity,
    AdjointSymmetry,
    L2Spectrum,
    ODEContinuation,
    MellinFit,
    CylinderExact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub kind: OracleKind,
    pub pass: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl OracleReport {
    /// `pass` is `measured <= tolerance`; NaN never passes.
    pub fn new(kind: OracleKind, measured: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            kind,
            pass: measured <= tolerance,
            measured,
            tolerance,
            detail: detail.into(),
        }
    }
}
