//! Chebyshev grids, differentiation matrices, quadrature and series.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eig::DenseRealMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("x_min = {x_min} must satisfy -1 <= x_min < 0")]
    XMinOutOfRange { x_min: f64 },
    #[error("grid needs at least {min} nodes, got {n}")]
    TooFewNodes { n: usize, min: usize },
    #[error("only {count} nodes lie in x < 0; at least 3 are required")]
    TooFewNegativeNodes { count: usize },
    #[error("interval [{lower}, {upper}] is empty or not finite")]
    BadInterval { lower: f64, upper: f64 },
}

pub const MIN_GRID_NODES: usize = 16;

/// Chebyshev–Lobatto nodes on `[x_min, upper]`, stored in decreasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub upper: f64,
    pub nodes: Vec<f64>,
}

/// The standard grid on `[x_min, 1]` used for mode pencils.
pub fn make_grid(x_min: f64, n: usize) -> Result<Grid, GridError> {
    if !(x_min >= -1.0 && x_min < 0.0) {
        return Err(GridError::XMinOutOfRange { x_min });
    }
    if n < MIN_GRID_NODES {
        return Err(GridError::TooFewNodes {
            n,
            min: MIN_GRID_NODES,
        });
    }
    let grid = Grid::chebyshev(x_min, 1.0, n)?;
    let count = grid.nodes.iter().filter(|&&x| x < 0.0).count();
    if count < 3 {
        return Err(GridError::TooFewNegativeNodes { count });
    }
    Ok(grid)
}

impl Grid {
    /// Lobatto grid on an arbitrary interval with `n >= 2` nodes and no
    /// further checks.
    pub fn chebyshev(lower: f64, upper: f64, n: usize) -> Result<Self, GridError> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(GridError::BadInterval { lower, upper });
        }
        if n < 2 {
            return Err(GridError::TooFewNodes { n, min: 2 });
        }
        let (c, h) = ((upper + lower) / 2.0, (upper - lower) / 2.0);
        let m = (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n)
            .map(|j| {
                // sin form keeps the reference nodes exactly antisymmetric
                let s = (PI * (m - 2.0 * j as f64) / (2.0 * m)).sin();
                c + h * s
            })
            .collect();
        nodes[0] = upper;
        nodes[n - 1] = lower;
        Ok(Self {
            x_min: lower,
            upper,
            nodes,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn center(&self) -> f64 {
        (self.upper + self.x_min) / 2.0
    }

    pub fn half_width(&self) -> f64 {
        (self.upper - self.x_min) / 2.0
    }

    /// Affine map to the reference interval `[-1, 1]`.
    pub fn to_reference(&self, x: f64) -> f64 {
        (x - self.center()) / self.half_width()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffMatrices {
    pub d1: DenseRealMatrix,
    pub d2: DenseRealMatrix,
}

pub fn diff_matrices(grid: &Grid) -> DiffMatrices {
    let n = grid.len();
    let m = (n - 1) as f64;
    let sign = |j: usize| if j % 2 == 0 { 1.0 } else { -1.0 };
    let weight = |j: usize| if j == 0 || j == n - 1 { 2.0 } else { 1.0 };
    let mut d1 = DenseRealMatrix::zeros(n, n);
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            // t_i - t_j without cancellation
            let diff = 2.0
                * (PI * (i + j) as f64 / (2.0 * m)).sin()
                * (PI * (j as f64 - i as f64) / (2.0 * m)).sin();
            let v = (weight(i) / weight(j)) * sign(i + j) / diff;
            d1[(i, j)] = v;
            row_sum += v;
        }
        d1[(i, i)] = -row_sum;
    }
    let scale = 1.0 / grid.half_width();
    d1.as_mut_slice().iter_mut().for_each(|v| *v *= scale);
    let d2 = d1.matmul(&d1);
    DiffMatrices { d1, d2 }
}

/// Clenshaw–Curtis weights for the grid's nodes.
pub fn clenshaw_curtis_weights(grid: &Grid) -> Vec<f64> {
    let n = grid.len();
    let m = n - 1;
    let mut w = vec![0.0; n];
    if m == 0 {
        return w;
    }
    let mf = m as f64;
    for (j, wj) in w.iter_mut().enumerate() {
        let theta = PI * j as f64 / mf;
        let mut v = 1.0;
        let half = m / 2;
        for k in 1..=half {
            let b = if 2 * k == m { 1.0 } else { 2.0 };
            v -= b * (2.0 * k as f64 * theta).cos() / (4.0 * (k * k) as f64 - 1.0);
        }
        let c = if j == 0 || j == m { 1.0 } else { 2.0 };
        *wj = c * v / mf;
    }
    let h = grid.half_width();
    w.iter_mut().for_each(|v| *v *= h);
    w
}

/// A Chebyshev series `sum c_k T_k(s)` on `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebSeries<T> {
    pub coeffs: Vec<T>,
    pub lower: f64,
    pub upper: f64,
}

impl<T> ChebSeries<T>
where
    T: Copy + num_traits::Zero + std::ops::Mul<f64, Output = T> + std::ops::Sub<Output = T>,
{
    pub fn eval(&self, x: f64) -> T {
        let s = (2.0 * x - self.upper - self.lower) / (self.upper - self.lower);
        let (mut b1, mut b2) = (T::zero(), T::zero());
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + b1 * (2.0 * s) - b2;
            b2 = b1;
            b1 = b0;
        }
        match self.coeffs.first() {
            Some(&c0) => c0 + b1 * s - b2,
            None => T::zero(),
        }
    }

    pub fn derivative(&self) -> Self {
        let n = self.coeffs.len();
        if n <= 1 {
            return Self {
                coeffs: vec![T::zero()],
                lower: self.lower,
                upper: self.upper,
            };
        }
        let mut d = vec![T::zero(); n];
        for k in (0..n - 1).rev() {
            let next = if k + 2 < n { d[k + 2] } else { T::zero() };
            d[k] = next + self.coeffs[k + 1] * (2.0 * (k + 1) as f64);
        }
        d[0] = d[0] * 0.5;
        d.truncate(n - 1);
        let scale = 2.0 / (self.upper - self.lower);
        Self {
            coeffs: d.into_iter().map(|c| c * scale).collect(),
            lower: self.lower,
            upper: self.upper,
        }
    }
}

/// Chebyshev coefficients of the polynomial interpolating `values` at the
/// grid's (decreasing) Lobatto nodes.
pub fn lobatto_coefficients<T>(grid: &Grid, values: &[T]) -> ChebSeries<T>
where
    T: Copy + num_traits::Zero + std::ops::Mul<f64, Output = T>,
{
    let n = values.len();
    assert_eq!(n, grid.len(), "value count must match grid");
    let m = (n - 1) as f64;
    let coeffs = (0..n)
        .map(|k| {
            let mut acc = T::zero();
            for (j, &v) in values.iter().enumerate() {
                let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
                // reduce the angle exactly before taking the cosine
                let p = (j * k) % (2 * (n - 1));
                acc = acc + v * (w * (PI * p as f64 / m).cos());
            }
            let ck = if k == 0 || k == n - 1 { 1.0 / m } else { 2.0 / m };
            acc * ck
        })
        .collect();
    ChebSeries {
        coeffs,
        lower: grid.x_min,
        upper: grid.upper,
    }
}

/// Coefficients of `f` on `[lower, upper]` from `m` first-kind points.
pub fn sample_coefficients(f: impl Fn(f64) -> f64, lower: f64, upper: f64, m: usize) -> Vec<f64> {
    let (c, h) = ((upper + lower) / 2.0, (upper - lower) / 2.0);
    let mf = m as f64;
    let values: Vec<f64> = (0..m)
        .map(|j| f(c + h * (PI * (j as f64 + 0.5) / mf).cos()))
        .collect();
    // cos(pi k (2j+1) / 2m) with the angle index reduced mod 4m
    let table: Vec<f64> = (0..4 * m).map(|p| (PI * p as f64 / (2.0 * mf)).cos()).collect();
    (0..m)
        .map(|k| {
            let s: f64 = values
                .iter()
                .enumerate()
                .map(|(j, v)| v * table[(k * (2 * j + 1)) % (4 * m)])
                .sum();
            if k == 0 {
                s / mf
            } else {
                2.0 * s / mf
            }
        })
        .collect()
}

/// Drops trailing coefficients below `rel * max|c|`, keeping at least `min_len`.
pub fn chop(mut coeffs: Vec<f64>, rel: f64, min_len: usize) -> Vec<f64> {
    let max = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let keep = coeffs
        .iter()
        .rposition(|c| c.abs() > rel * max)
        .map_or(0, |i| i + 1)
        .max(min_len)
        .min(coeffs.len());
    coeffs.truncate(keep);
    coeffs
}

/// Coefficients below this fraction of the largest are treated as roundoff.
pub const CHOP_RELATIVE: f64 = 2.0e-15;

/// Adaptive first-kind sampling: doubles the sample count until the tail is
/// resolved, then chops.
pub fn resolve_function(f: impl Fn(f64) -> f64, lower: f64, upper: f64) -> Vec<f64> {
    let mut m = 128;
    loop {
        let coeffs = sample_coefficients(&f, lower, upper, m);
        let max = coeffs.iter().fold(0.0_f64, |a, c| a.max(c.abs()));
        let tail = coeffs[m - m / 8..].iter().fold(0.0_f64, |a, c| a.max(c.abs()));
        if tail <= 1.0e-14 * max || m >= 4096 {
            if m >= 4096 && tail > 1.0e-14 * max {
                log::warn!("coefficient function not resolved by {m} samples (tail {tail:.2e})");
            }
            return chop(coeffs, CHOP_RELATIVE, 2);
        }
        m *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(grid: &Grid, f: impl Fn(f64) -> f64) -> Vec<f64> {
        grid.nodes.iter().map(|&x| f(x)).collect()
    }

    #[test]
    fn three_point_grid_on_unit_interval() {
        let g = Grid::chebyshev(-1.0, 1.0, 3).unwrap();
        assert_eq!(g.nodes, vec![1.0, 0.0, -1.0]);
    }

    #[test]
    fn make_grid_endpoints_and_count() {
        let g = make_grid(-0.4, 17).unwrap();
        assert_eq!(g.len(), 17);
        assert_eq!(g.nodes[0], 1.0);
        assert_eq!(g.nodes[16], -0.4);
        assert!(g.nodes.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn make_grid_rejects_bad_input() {
        assert!(matches!(make_grid(-0.4, 8), Err(GridError::TooFewNodes { .. })));
        assert!(matches!(make_grid(0.0, 32), Err(GridError::XMinOutOfRange { .. })));
        assert!(matches!(make_grid(-1.5, 32), Err(GridError::XMinOutOfRange { .. })));
        assert!(matches!(make_grid(-0.01, 16), Err(GridError::TooFewNegativeNodes { .. })));
    }

    #[test]
    fn d1_on_quadratic_and_constant() {
        let g = make_grid(-0.4, 20).unwrap();
        let d = diff_matrices(&g);
        let du = d.d1.matvec(&samples(&g, |x| x * x));
        for (v, &x) in du.iter().zip(&g.nodes) {
            assert!((v - 2.0 * x).abs() <= 1e-12 * 2.0_f64.max((2.0 * x).abs()));
        }
        let dc = d.d1.matvec(&vec![1.0; 20]);
        assert!(dc.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn d2_on_cubic() {
        let g = make_grid(-0.4, 20).unwrap();
        let d = diff_matrices(&g);
        let du = d.d2.matvec(&samples(&g, |x| x.powi(3)));
        for (v, &x) in du.iter().zip(&g.nodes) {
            assert!((v - 6.0 * x).abs() <= 1e-10 * 6.0);
        }
    }

    #[test]
    fn clenshaw_curtis_integrates_polynomials() {
        let g = make_grid(-0.4, 21).unwrap();
        let w = clenshaw_curtis_weights(&g);
        assert!(w.iter().all(|&v| v > 0.0));
        let integral: f64 = w.iter().zip(&g.nodes).map(|(w, x)| w * x.powi(6)).sum();
        let exact = (1.0 + 0.4_f64.powi(7)) / 7.0;
        assert!((integral - exact).abs() < 1e-14);
    }

    #[test]
    fn lobatto_coefficients_reproduce_values_and_derivative() {
        let g = make_grid(-0.4, 24).unwrap();
        let f = |x: f64| (2.0 * x).sin() + x * x;
        let s = lobatto_coefficients(&g, &samples(&g, f));
        for x in [-0.3, 0.0, 0.41, 0.99] {
            assert!((s.eval(x) - f(x)).abs() < 1e-13);
            let df = 2.0 * (2.0 * x).cos() + 2.0 * x;
            assert!((s.derivative().eval(x) - df).abs() < 1e-11);
        }
    }

    #[test]
    fn sampled_coefficients_of_exp() {
        let c = resolve_function(f64::exp, -0.4, 1.0);
        assert!(c.len() < 30);
        let s = ChebSeries {
            coeffs: c,
            lower: -0.4,
            upper: 1.0,
        };
        assert!((s.eval(0.3) - 0.3_f64.exp()).abs() < 1e-15);
    }
}
