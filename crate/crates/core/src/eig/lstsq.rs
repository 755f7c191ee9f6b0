use num_complex::Complex64;
use num_traits::Zero;

use super::matrix::{vec_norm, DenseComplexMatrix};
use super::EigError;

/// Least-squares solution of an overdetermined system.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub x: Vec<Complex64>,
    pub residual_norm: f64,
    /// Ratio of largest to smallest |R_ii|; a cheap conditioning proxy.
    pub diag_ratio: f64,
}

/// Minimizes `||M x - rhs||_2` by Householder QR. Requires `rows >= cols`.
pub fn lstsq(m: &DenseComplexMatrix, rhs: &[Complex64]) -> Result<LeastSquares, EigError> {
    let (rows, cols) = (m.nrows(), m.ncols());
    if rows < cols {
        return Err(EigError::Underdetermined { rows, cols });
    }
    if rhs.len() != rows {
        return Err(EigError::DimensionMismatch {
            expected: rows,
            actual: rhs.len(),
        });
    }
    let mut r = m.clone();
    let mut b = rhs.to_vec();
    let mut v = vec![Complex64::zero(); rows];

    for k in 0..cols {
        let norm: f64 = (k..rows).map(|i| r[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(EigError::Singular { pivot_index: k });
        }
        let x0 = r[(k, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        for i in k..rows {
            v[i] = r[(i, k)];
        }
        v[k] += phase * norm;
        let vv: f64 = (k..rows).map(|i| v[i].norm_sqr()).sum();
        let tau = 2.0 / vv;
        for j in k..cols {
            let dot: Complex64 = (k..rows).map(|i| v[i].conj() * r[(i, j)]).sum();
            let s = dot * tau;
            for i in k..rows {
                let vi = v[i];
                r[(i, j)] -= s * vi;
            }
        }
        let dot: Complex64 = (k..rows).map(|i| v[i].conj() * b[i]).sum();
        let s = dot * tau;
        for i in k..rows {
            b[i] -= s * v[i];
        }
    }

    let diag: Vec<f64> = (0..cols).map(|i| r[(i, i)].norm()).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(dmin > f64::EPSILON * dmax) {
        let pivot_index = diag.iter().position(|&d| d == dmin).unwrap_or(0);
        return Err(EigError::Singular { pivot_index });
    }
    let mut x = vec![Complex64::zero(); cols];
    for i in (0..cols).rev() {
        let mut acc = b[i];
        for j in (i + 1)..cols {
            acc -= r[(i, j)] * x[j];
        }
        x[i] = acc / r[(i, i)];
    }
    Ok(LeastSquares {
        x,
        residual_norm: vec_norm(&b[cols..]),
        diag_ratio: if cols == 0 { 1.0 } else { dmax / dmin },
    })
}
