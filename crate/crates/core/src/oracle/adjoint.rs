//! Weighted symmetry defect `|<P(lambda) u, v>_W - <u, P(conj lambda) v>_W|`.

use num_complex::Complex64;

use super::OracleError;
use crate::assembly::{apply_pencil, assemble_mode_pencil, weighted_pairing};
use crate::chebyshev::make_grid;
use crate::geometry::{BoundaryClosure, EvenMetricSpec};

pub type TestFn<'a> = &'a dyn Fn(f64) -> f64;

/// Smooth bump on `(lower, upper)` vanishing to infinite order at both ends.
pub fn bump(lower: f64, upper: f64, x: f64) -> f64 {
    if x <= lower || x >= upper {
        0.0
    } else {
        (-1.0 / ((x - lower) * (upper - x))).exp()
    }
}

pub fn adjoint_defect(
    spec: &EvenMetricSpec,
    k: i64,
    x_min: f64,
    n: usize,
    lambda: Complex64,
    u: TestFn<'_>,
    v: TestFn<'_>,
) -> Result<f64, OracleError> {
    let grid = make_grid(x_min, n).map_err(|e| OracleError::InvalidInput(e.to_string()))?;
    let p = assemble_mode_pencil(spec, k, &grid, BoundaryClosure::Dirichlet)
        .map_err(|e| OracleError::InvalidInput(e.to_string()))?;
    let us: Vec<Complex64> = grid.nodes.iter().map(|&x| Complex64::new(u(x), 0.0)).collect();
    let vs: Vec<Complex64> = grid.nodes.iter().map(|&x| Complex64::new(v(x), 0.0)).collect();
    let pu = apply_pencil(&p, lambda).matvec(&us);
    let pv = apply_pencil(&p, lambda.conj()).matvec(&vs);
    Ok((weighted_pairing(&p.weights, &pu, &vs) - weighted_pairing(&p.weights, &us, &pv)).norm())
}
