//! Dense complex linear algebra: LU, Hessenberg QR, least squares, and the
//! shift-invert driver for linear pencils.

pub mod lstsq;
pub mod lu;
pub mod matrix;
pub mod pencil;
pub mod qr;

use num_complex::Complex64;
use thiserror::Error;

pub use lstsq::{lstsq, LeastSquares};
pub use lu::{lu_solve, LuDecomposition};
pub use matrix::{DenseComplexMatrix, DenseMatrix, DenseRealMatrix};
pub use pencil::{pencil_eigs, pencil_eigs_ab, pencil_residual, ShiftInvertConfig};
pub use qr::{hessenberg, qr_eigenvalues, qr_eigenvalues_with_limit, EigResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("matrix is singular to working precision at pivot {pivot_index}")]
    Singular { pivot_index: usize },
    #[error("least-squares system is underdetermined ({rows}x{cols})")]
    Underdetermined { rows: usize, cols: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("shift {sigma} is unusable: condition estimate {condition:.3e}")]
    ShiftFailure { sigma: Complex64, condition: f64 },
}
