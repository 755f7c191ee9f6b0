use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lu::LuDecomposition;
use super::matrix::{vec_norm, DenseComplexMatrix};
use super::qr::{qr_eigenvalues_with_limit, EigResult, DEFAULT_ITERATIONS_PER_EIGENVALUE};
use super::EigError;
use crate::assembly::ModePencil;

/// Settings for the shift-invert pencil solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftInvertConfig {
    pub sigma: Complex64,
    pub max_qr_iterations: usize,
    pub qr_tol: f64,
    /// Discard `lambda` with `|lambda - sigma|` above this.
    pub keep_radius: f64,
    /// Pencil residuals above this are flagged.
    pub residual_flag: f64,
}

impl Default for ShiftInvertConfig {
    fn default() -> Self {
        Self {
            sigma: Complex64::new(-1.0, -0.5),
            max_qr_iterations: 0,
            qr_tol: 1.0e-14,
            keep_radius: 6.0,
            residual_flag: 1.0e-8,
        }
    }
}

impl ShiftInvertConfig {
    pub fn with_sigma(sigma: Complex64) -> Self {
        Self {
            sigma,
            ..Self::default()
        }
    }

    fn iteration_cap(&self, n: usize) -> usize {
        if self.max_qr_iterations == 0 {
            DEFAULT_ITERATIONS_PER_EIGENVALUE * n.max(1)
        } else {
            self.max_qr_iterations
        }
    }
}

/// Scales rows of `(A, B)` jointly to unit max-norm; eigenvalues are unchanged.
pub fn equilibrate_rows(a: &DenseComplexMatrix, b: &DenseComplexMatrix) -> (DenseComplexMatrix, DenseComplexMatrix) {
    let mut a = a.clone();
    let mut b = b.clone();
    for i in 0..a.nrows() {
        let m = a
            .row(i)
            .iter()
            .chain(b.row(i))
            .fold(0.0_f64, |acc, z| acc.max(z.norm()));
        if m > 0.0 {
            let inv = 1.0 / m;
            a.row_mut(i).iter_mut().for_each(|z| *z *= inv);
            b.row_mut(i).iter_mut().for_each(|z| *z *= inv);
        }
    }
    (a, b)
}

/// `||(A + lambda B) v|| / ((||A||_F + |lambda| ||B||_F) ||v||)`.
pub fn pencil_residual(a: &DenseComplexMatrix, b: &DenseComplexMatrix, lambda: Complex64, v: &[Complex64]) -> f64 {
    let av = a.matvec(v);
    let bv = b.matvec(v);
    let r: Vec<Complex64> = av.iter().zip(&bv).map(|(x, y)| x + lambda * y).collect();
    let denom = (a.frobenius_norm() + lambda.norm() * b.frobenius_norm()) * vec_norm(v);
    if denom == 0.0 {
        return f64::INFINITY;
    }
    vec_norm(&r) / denom
}

/// Finite eigenvalues of `A + lambda B` near `cfg.sigma`.
///
/// Rows are equilibrated first, and residuals refer to the equilibrated pencil.
pub fn pencil_eigs_ab(
    a: &DenseComplexMatrix,
    b: &DenseComplexMatrix,
    cfg: &ShiftInvertConfig,
) -> Result<EigResult, EigError> {
    if !a.is_square() {
        return Err(EigError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if (a.nrows(), a.ncols()) != (b.nrows(), b.ncols()) {
        return Err(EigError::DimensionMismatch {
            expected: a.nrows(),
            actual: b.nrows(),
        });
    }
    let (a, b) = equilibrate_rows(a, b);
    let shifted = a.add_scaled(cfg.sigma, &b);
    let lu = LuDecomposition::new(&shifted).map_err(|e| match e {
        EigError::Singular { .. } => EigError::ShiftFailure {
            sigma: cfg.sigma,
            condition: f64::INFINITY,
        },
        other => other,
    })?;
    let condition = lu.condition_estimate();
    if !(condition < 1.0 / cfg.qr_tol) {
        return Err(EigError::ShiftFailure {
            sigma: cfg.sigma,
            condition,
        });
    }
    let m = lu.solve_matrix(&b)?;
    let standard = qr_eigenvalues_with_limit(&m, cfg.iteration_cap(m.nrows()))?;

    // Eigenvalues of M below this are images of infinite pencil eigenvalues.
    let nu_floor = cfg.qr_tol.sqrt() * m.max_abs().max(f64::MIN_POSITIVE);
    let mut out = EigResult {
        values: Vec::new(),
        vectors: Vec::new(),
        residuals: Vec::new(),
        flagged: Vec::new(),
        iterations: standard.iterations,
        converged: standard.converged,
    };
    for (nu, v) in standard.values.iter().zip(standard.vectors) {
        if !(nu.norm() > nu_floor) {
            continue;
        }
        let lambda = cfg.sigma - nu.inv();
        if (lambda - cfg.sigma).norm() > cfg.keep_radius {
            continue;
        }
        let r = pencil_residual(&a, &b, lambda, &v);
        out.values.push(lambda);
        out.residuals.push(r);
        out.flagged.push(!(r <= cfg.residual_flag));
        out.vectors.push(v);
    }
    Ok(out)
}

/// Shift-invert eigenvalues of a mode pencil.
pub fn pencil_eigs(p: &ModePencil, cfg: &ShiftInvertConfig) -> Result<EigResult, EigError> {
    pencil_eigs_ab(&p.a, &p.b, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn scalar_pencil() {
        let a = DenseComplexMatrix::from_row_major(1, 1, vec![c(2.0)]);
        let b = DenseComplexMatrix::from_row_major(1, 1, vec![c(1.0)]);
        let res = pencil_eigs_ab(&a, &b, &ShiftInvertConfig::with_sigma(c(0.0))).unwrap();
        assert_eq!(res.values.len(), 1);
        assert!((res.values[0] - c(-2.0)).norm() < 1e-14);
        assert!(!res.flagged[0]);
    }

    #[test]
    fn diagonal_pencil_with_negative_identity() {
        let a = DenseComplexMatrix::from_row_major(2, 2, vec![c(1.0), c(0.0), c(0.0), c(2.0)]);
        let b = DenseComplexMatrix::identity(2).scale(c(-1.0));
        let cfg = ShiftInvertConfig {
            keep_radius: 20.0,
            ..ShiftInvertConfig::with_sigma(c(10.0))
        };
        let res = pencil_eigs_ab(&a, &b, &cfg).unwrap();
        let mut vals: Vec<f64> = res.values.iter().map(|z| z.re).collect();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] - 1.0).abs() < 1e-13 && (vals[1] - 2.0).abs() < 1e-13);
    }

    #[test]
    fn singular_b_row_gives_no_infinite_eigenvalue() {
        let a = DenseComplexMatrix::from_row_major(2, 2, vec![c(1.0), c(0.0), c(0.0), c(3.0)]);
        let b = DenseComplexMatrix::from_row_major(2, 2, vec![c(0.0), c(0.0), c(0.0), c(1.0)]);
        let res = pencil_eigs_ab(&a, &b, &ShiftInvertConfig::with_sigma(c(0.5))).unwrap();
        assert_eq!(res.values.len(), 1);
        assert!((res.values[0] - c(-3.0)).norm() < 1e-13);
    }

    #[test]
    fn shift_on_eigenvalue_fails() {
        let a = DenseComplexMatrix::from_row_major(1, 1, vec![c(2.0)]);
        let b = DenseComplexMatrix::from_row_major(1, 1, vec![c(1.0)]);
        let err = pencil_eigs_ab(&a, &b, &ShiftInvertConfig::with_sigma(c(-2.0))).unwrap_err();
        assert!(matches!(err, EigError::ShiftFailure { .. }));
    }

    #[test]
    fn keep_radius_discards_far_values() {
        let a = DenseComplexMatrix::from_row_major(2, 2, vec![c(1.0), c(0.0), c(0.0), c(50.0)]);
        let b = DenseComplexMatrix::identity(2).scale(c(-1.0));
        let cfg = ShiftInvertConfig {
            keep_radius: 5.0,
            ..ShiftInvertConfig::with_sigma(c(0.0))
        };
        let res = pencil_eigs_ab(&a, &b, &cfg).unwrap();
        assert_eq!(res.values.len(), 1);
    }
}
