//! The model kernel `(x D^2 - i(rho+1) D) x^(-rho) = 0` and the indicial polynomial.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::OracleError;
use crate::chebyshev::{diff_matrices, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelResidual {
    /// Coefficient of `x^(-rho-1)` after symbolic differentiation.
    pub symbolic: f64,
    /// Max interior residual of the discrete operator on sampled `x^(-rho)`.
    pub discrete: f64,
}

/// With `D = -i d/dx` the operator is `-x u'' - (rho+1) u'`.
pub fn model_kernel_residual(rho: f64, grid: &Grid) -> Result<KernelResidual, OracleError> {
    if !rho.is_finite() || (rho < 0.0 && rho.fract() == 0.0) {
        return Err(OracleError::InvalidInput(format!("rho = {rho} lies on a pole")));
    }
    if grid.nodes.iter().any(|&x| x <= 0.0) {
        return Err(OracleError::InvalidInput("nodes must be positive".into()));
    }
    let e = -rho;
    let symbolic = -e * (e - 1.0) - (rho + 1.0) * e;
    let d = diff_matrices(grid);
    // Derivatives ignore constants; subtracting one removes its roundoff.
    let reference = grid.nodes[0].powf(e);
    let u: Vec<f64> = grid.nodes.iter().map(|&x| x.powf(e) - reference).collect();
    let du = d.d1.matvec(&u);
    let ddu = d.d2.matvec(&u);
    let last = grid.len() - 1;
    let discrete = (1..last)
        .map(|j| (-grid.nodes[j] * ddu[j] - (rho + 1.0) * du[j]).abs())
        .fold(0.0, f64::max);
    Ok(KernelResidual {
        symbolic: symbolic.abs(),
        discrete,
    })
}

/// Coefficient of `x^(s-1)` in the principal part applied to `x^s`: `4 s (i lambda - s)`.
pub fn indicial_coefficient(lambda: Complex64, s: Complex64) -> Complex64 {
    4.0 * s * (Complex64::i() * lambda - s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbolic_residual_is_exactly_zero() {
        let g = Grid::chebyshev(0.2, 1.0, 64).unwrap();
        for rho in [0.0, 0.3, 0.7, 1.3, 5.5] {
            assert_eq!(model_kernel_residual(rho, &g).unwrap().symbolic, 0.0);
        }
    }

    #[test]
    fn discrete_residual_is_small() {
        let g = Grid::chebyshev(0.2, 1.0, 64).unwrap();
        assert!(model_kernel_residual(1.3, &g).unwrap().discrete <= 1e-8);
        assert!(model_kernel_residual(0.0, &g).unwrap().discrete == 0.0);
    }

    #[test]
    fn poles_are_rejected() {
        let g = Grid::chebyshev(0.2, 1.0, 16).unwrap();
        assert!(model_kernel_residual(-2.0, &g).is_err());
        assert!(model_kernel_residual(-2.5, &g).is_ok());
        assert!(model_kernel_residual(1.0, &Grid::chebyshev(-0.2, 1.0, 16).unwrap()).is_err());
    }

    #[test]
    fn indicial_roots() {
        let l = Complex64::new(0.4, -1.3);
        let zero = Complex64::new(0.0, 0.0);
        assert_eq!(indicial_coefficient(l, zero), zero);
        assert_eq!(indicial_coefficient(l, Complex64::i() * l), zero);
        assert_eq!(indicial_coefficient(Complex64::new(0.0, -1.0), Complex64::new(1.0, 0.0)), zero);
    }
}
