//! Per-mode discretization of `P(lambda) = A + lambda B` on `[x_min, 1]`.
//!
//! With `f` the warp, `gamma = -2 f'/f` and `zeta = n/2 - i lambda`,
//!
//! ```text
//! P(lambda) u = -4x u'' + (2 gamma x - 4 + 4 i lambda) u' + (k^2/f^2 + gamma zeta) u.
//! ```
//!
//! Two discretizations share one interface: nodal collocation on the
//! Lobatto grid, and an ultraspherical spectral method acting on Chebyshev
//! coefficients. Either way row 0 carries the closure at the neck `x = 1`.
//! The Neumann closure is imposed on the unconjugated function
//! `x^(zeta/2) u`, which gives the `lambda`-dependent Robin row
//! `u'(1) + (n/4 - i lambda / 2) u(1) = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chebyshev::{
    clenshaw_curtis_weights, diff_matrices, lobatto_coefficients, resolve_function, sample_coefficients, ChebSeries,
    Grid, GridError,
};
use crate::eig::{DenseComplexMatrix, DenseRealMatrix, EigError, LuDecomposition};
use crate::geometry::{BoundaryClosure, EvenMetricSpec, GeometryError};
use crate::ultraspherical as us;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Linear(#[from] EigError),
    #[error("epsilon {eps} is below the first positive node {first_positive}")]
    EpsilonTooSmall { eps: f64, first_positive: f64 },
    #[error("coefficient function is not finite on the grid interval")]
    NonFiniteCoefficient,
    #[error("operation needs a {expected:?} pencil")]
    WrongDiscretization { expected: Discretization },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Discretization {
    /// Nodal values on the Lobatto grid.
    Collocation,
    /// Chebyshev coefficients with ultraspherical operators.
    #[default]
    Ultraspherical,
}

/// Discrete `P(lambda) = A + lambda B` for one Fourier mode.
#[derive(Debug, Clone)]
pub struct ModePencil {
    pub k: i64,
    pub n: u32,
    pub closure: BoundaryClosure,
    pub grid: Grid,
    pub discretization: Discretization,
    pub a: DenseComplexMatrix,
    pub b: DenseComplexMatrix,
    /// Clenshaw–Curtis weights times `hbar^(1/2) = f` at the grid nodes.
    pub weights: Vec<f64>,
    /// Row carrying the closure (the node `x = 1`).
    pub bc_row: usize,
}

struct Coefficients {
    gamma: Vec<f64>,
    potential: Vec<f64>,
}

fn nodal_coefficients(spec: &EvenMetricSpec, k: i64, grid: &Grid) -> Result<Coefficients, GeometryError> {
    let half_n = spec.n as f64 / 2.0;
    let mut gamma = Vec::with_capacity(grid.len());
    let mut potential = Vec::with_capacity(grid.len());
    for &x in &grid.nodes {
        let g = spec.gamma(x)?;
        gamma.push(g);
        potential.push(spec.mode_potential(k, x)? + g * half_n);
    }
    Ok(Coefficients { gamma, potential })
}

/// `hbar^(1/2)`-weighted Clenshaw–Curtis quadrature on the grid.
pub fn quadrature_weights(spec: &EvenMetricSpec, grid: &Grid) -> Result<Vec<f64>, GeometryError> {
    clenshaw_curtis_weights(grid)
        .into_iter()
        .zip(&grid.nodes)
        .map(|(w, &x)| Ok(w * spec.f(x)?))
        .collect()
}

fn i_times(m: &DenseRealMatrix, s: f64) -> DenseComplexMatrix {
    DenseComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| Complex64::new(0.0, s * m[(i, j)]))
}

fn closure_rows(closure: BoundaryClosure, value: &[f64], derivative: &[f64], n: u32) -> (Vec<Complex64>, Vec<Complex64>) {
    match closure {
        BoundaryClosure::Dirichlet => (
            value.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            vec![Complex64::new(0.0, 0.0); value.len()],
        ),
        BoundaryClosure::Neumann => (
            derivative
                .iter()
                .zip(value)
                .map(|(&d, &v)| Complex64::new(d + n as f64 / 4.0 * v, 0.0))
                .collect(),
            value.iter().map(|&v| Complex64::new(0.0, -0.5 * v)).collect(),
        ),
    }
}

/// Collocation pencil on the Lobatto nodes.
pub fn assemble_mode_pencil(
    spec: &EvenMetricSpec,
    k: i64,
    grid: &Grid,
    closure: BoundaryClosure,
) -> Result<ModePencil, AssemblyError> {
    let n_pts = grid.len();
    let coeffs = nodal_coefficients(spec, k, grid)?;
    let d = diff_matrices(grid);
    let mut a = DenseComplexMatrix::zeros(n_pts, n_pts);
    let mut b = DenseComplexMatrix::zeros(n_pts, n_pts);
    for i in 0..n_pts {
        let x = grid.nodes[i];
        let g = coeffs.gamma[i];
        let first = 2.0 * g * x - 4.0;
        for j in 0..n_pts {
            a[(i, j)] = Complex64::new(-4.0 * x * d.d2[(i, j)] + first * d.d1[(i, j)], 0.0);
            b[(i, j)] = Complex64::new(0.0, 4.0 * d.d1[(i, j)]);
        }
        a[(i, i)] += coeffs.potential[i];
        b[(i, i)] -= Complex64::new(0.0, g);
    }
    let bc_row = 0;
    let mut e0 = vec![0.0; n_pts];
    e0[0] = 1.0;
    let (ra, rb) = closure_rows(closure, &e0, d.d1.row(0), spec.n);
    a.row_mut(bc_row).copy_from_slice(&ra);
    b.row_mut(bc_row).copy_from_slice(&rb);
    Ok(ModePencil {
        k,
        n: spec.n,
        closure,
        grid: grid.clone(),
        discretization: Discretization::Collocation,
        a,
        b,
        weights: quadrature_weights(spec, grid)?,
        bc_row,
    })
}

fn resolved(grid: &Grid, f: impl Fn(f64) -> Result<f64, GeometryError>) -> Result<Vec<f64>, AssemblyError> {
    for &x in &grid.nodes {
        f(x)?;
    }
    let coeffs = resolve_function(|x| f(x).unwrap_or(f64::NAN), grid.x_min, grid.upper);
    if coeffs.iter().all(|c| c.is_finite()) {
        Ok(coeffs)
    } else {
        Err(AssemblyError::NonFiniteCoefficient)
    }
}

/// Ultraspherical pencil acting on Chebyshev coefficients of `u`.
pub fn assemble_spectral_pencil(
    spec: &EvenMetricSpec,
    k: i64,
    grid: &Grid,
    closure: BoundaryClosure,
) -> Result<ModePencil, AssemblyError> {
    let n_pts = grid.len();
    let h = grid.half_width();
    let half_n = spec.n as f64 / 2.0;
    let gamma = resolved(grid, |x| spec.gamma(x))?;
    let first = resolved(grid, |x| Ok(2.0 * spec.gamma(x)? * x - 4.0))?;
    let potential = resolved(grid, |x| Ok(spec.mode_potential(k, x)? + spec.gamma(x)? * half_n))?;

    let d1 = us::d1(n_pts, h);
    let d2 = us::d2(n_pts, h);
    let s0 = us::s0(n_pts);
    let s1 = us::s1(n_pts);
    let s10 = s1.matmul(&s0);
    let s1d1 = s1.matmul(&d1);
    let mx = us::multiplication_c2(&[grid.center(), h], n_pts);

    let mut a_real = mx.matmul(&d2);
    a_real.as_mut_slice().iter_mut().for_each(|v| *v *= -4.0);
    let t1 = us::multiplication_c2(&first, n_pts).matmul(&s1d1);
    let t0 = us::multiplication_c2(&potential, n_pts).matmul(&s10);
    for ((v, &p), &q) in a_real.as_mut_slice().iter_mut().zip(t1.as_slice()).zip(t0.as_slice()) {
        *v += p + q;
    }
    let mut b_real = us::multiplication_c2(&gamma, n_pts).matmul(&s10);
    for (v, &p) in b_real.as_mut_slice().iter_mut().zip(s1d1.as_slice()) {
        *v = 4.0 * p - *v;
    }

    // Drop the last C^(2) row and put the closure on top.
    let a_full = a_real.to_complex();
    let b_full = i_times(&b_real, 1.0);
    let mut a = DenseComplexMatrix::zeros(n_pts, n_pts);
    let mut b = DenseComplexMatrix::zeros(n_pts, n_pts);
    for i in 1..n_pts {
        a.row_mut(i).copy_from_slice(a_full.row(i - 1));
        b.row_mut(i).copy_from_slice(b_full.row(i - 1));
    }
    let (ra, rb) = closure_rows(
        closure,
        &us::right_value_row(n_pts),
        &us::right_derivative_row(n_pts, h),
        spec.n,
    );
    a.row_mut(0).copy_from_slice(&ra);
    b.row_mut(0).copy_from_slice(&rb);
    Ok(ModePencil {
        k,
        n: spec.n,
        closure,
        grid: grid.clone(),
        discretization: Discretization::Ultraspherical,
        a,
        b,
        weights: quadrature_weights(spec, grid)?,
        bc_row: 0,
    })
}

pub fn assemble(
    spec: &EvenMetricSpec,
    k: i64,
    grid: &Grid,
    closure: BoundaryClosure,
    discretization: Discretization,
) -> Result<ModePencil, AssemblyError> {
    match discretization {
        Discretization::Collocation => assemble_mode_pencil(spec, k, grid, closure),
        Discretization::Ultraspherical => assemble_spectral_pencil(spec, k, grid, closure),
    }
}

/// `A + lambda B`.
pub fn apply_pencil(p: &ModePencil, lambda: Complex64) -> DenseComplexMatrix {
    p.a.add_scaled(lambda, &p.b)
}

/// `sum_j w_j a_j conj(b_j)`.
pub fn weighted_pairing(weights: &[f64], a: &[Complex64], b: &[Complex64]) -> Complex64 {
    weights
        .iter()
        .zip(a.iter().zip(b))
        .map(|(&w, (x, y))| x * y.conj() * w)
        .sum()
}

impl ModePencil {
    pub fn dimension(&self) -> usize {
        self.a.nrows()
    }

    /// Chebyshev series of a solution vector.
    pub fn series(&self, v: &[Complex64]) -> ChebSeries<Complex64> {
        match self.discretization {
            Discretization::Collocation => lobatto_coefficients(&self.grid, v),
            Discretization::Ultraspherical => ChebSeries {
                coeffs: v.to_vec(),
                lower: self.grid.x_min,
                upper: self.grid.upper,
            },
        }
    }

    /// Solution values at the grid nodes.
    pub fn nodal_values(&self, v: &[Complex64]) -> Vec<Complex64> {
        match self.discretization {
            Discretization::Collocation => v.to_vec(),
            Discretization::Ultraspherical => {
                let s = self.series(v);
                self.grid.nodes.iter().map(|&x| s.eval(x)).collect()
            }
        }
    }

    /// Discrete right-hand side for `P(lambda) u = f` with homogeneous closure.
    pub fn rhs(&self, f: impl Fn(f64) -> f64) -> Vec<Complex64> {
        let n_pts = self.dimension();
        let mut out = vec![Complex64::new(0.0, 0.0); n_pts];
        match self.discretization {
            Discretization::Collocation => {
                for (o, &x) in out.iter_mut().zip(&self.grid.nodes) {
                    *o = Complex64::new(f(x), 0.0);
                }
            }
            Discretization::Ultraspherical => {
                let mut c = sample_coefficients(&f, self.grid.x_min, self.grid.upper, n_pts.max(256));
                c.truncate(n_pts);
                let s10 = us::s1(n_pts).matmul(&us::s0(n_pts));
                let load = s10.matvec(&c);
                for i in 1..n_pts {
                    out[i] = Complex64::new(load[i - 1], 0.0);
                }
            }
        }
        out[self.bc_row] = Complex64::new(0.0, 0.0);
        out
    }

    /// Solves `P(lambda) u = rhs`.
    pub fn solve(&self, lambda: Complex64, rhs: &[Complex64]) -> Result<Vec<Complex64>, AssemblyError> {
        Ok(LuDecomposition::new(&apply_pencil(self, lambda))?.solve(rhs)?)
    }
}

/// An analytic real test function returning `(u, u', u'')`.
pub type TestFunction<'a> = &'a dyn Fn(f64) -> [f64; 3];

/// Max discrepancy between `y^-zeta (-Delta_g - zeta(n - zeta)) y^zeta u`
/// and `x P(lambda) u` on interior nodes with `x >= eps`.
pub fn conjugation_check(
    spec: &EvenMetricSpec,
    k: i64,
    grid: &Grid,
    lambda: Complex64,
    u: TestFunction<'_>,
    eps: f64,
) -> Result<f64, AssemblyError> {
    let pencil = assemble_mode_pencil(spec, k, grid, BoundaryClosure::Dirichlet)?;
    conjugation_residual(spec, &pencil, lambda, u, eps)
}

/// As [`conjugation_check`], against an already assembled collocation pencil.
pub fn conjugation_residual(
    spec: &EvenMetricSpec,
    pencil: &ModePencil,
    lambda: Complex64,
    u: TestFunction<'_>,
    eps: f64,
) -> Result<f64, AssemblyError> {
    if pencil.discretization != Discretization::Collocation {
        return Err(AssemblyError::WrongDiscretization {
            expected: Discretization::Collocation,
        });
    }
    let grid = &pencil.grid;
    let first_positive = grid
        .nodes
        .iter()
        .cloned()
        .filter(|&x| x > 0.0)
        .fold(f64::INFINITY, f64::min);
    if eps < first_positive {
        return Err(AssemblyError::EpsilonTooSmall { eps, first_positive });
    }
    let n = spec.n as f64;
    let zeta = Complex64::new(n / 2.0, 0.0) - Complex64::i() * lambda;
    let samples: Vec<Complex64> = grid.nodes.iter().map(|&x| Complex64::new(u(x)[0], 0.0)).collect();
    let pu = apply_pencil(pencil, lambda).matvec(&samples);

    let mut worst = 0.0_f64;
    for (i, &x) in grid.nodes.iter().enumerate() {
        if i == pencil.bc_row || x < eps {
            continue;
        }
        let [u0, u1, u2] = u(x);
        let y = x.sqrt();
        // Derivatives of U(y) = u(y^2).
        let y_uy = 2.0 * x * u1;
        let y2_uyy = 2.0 * x * u1 + 4.0 * x * x * u2;
        let euler_sq = zeta * zeta * u0 + (2.0 * zeta + 1.0) * y_uy + y2_uyy;
        let euler = zeta * u0 + y_uy;
        let lhs = -euler_sq + (n + y * y * spec.gamma(x)?) * euler + y * y * spec.mode_potential(pencil.k, x)? * u0
            - zeta * (n - zeta) * u0;
        let rhs = pu[i] * x;
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chebyshev::make_grid;
    use crate::geometry::ModelSurface;
    use std::f64::consts::PI;

    fn cylinder() -> EvenMetricSpec {
        ModelSurface::HyperbolicCylinder { ell: 2.0 * PI }.spec().unwrap()
    }

    fn flat() -> EvenMetricSpec {
        EvenMetricSpec::new("flat", |_| 1.0, |_| 0.0)
    }

    #[test]
    fn flat_profile_b_is_scaled_derivative() {
        let g = make_grid(-0.4, 20).unwrap();
        let p = assemble_mode_pencil(&flat(), 0, &g, BoundaryClosure::Dirichlet).unwrap();
        let d = diff_matrices(&g);
        for i in 0..20 {
            for j in 0..20 {
                let expect = if i == p.bc_row { 0.0 } else { 4.0 * d.d1[(i, j)] };
                assert_eq!(p.b[(i, j)], Complex64::new(0.0, expect));
            }
        }
    }

    #[test]
    fn apply_pencil_is_affine() {
        let g = make_grid(-0.4, 24).unwrap();
        let p = assemble_mode_pencil(&cylinder(), 2, &g, BoundaryClosure::Neumann).unwrap();
        assert_eq!(apply_pencil(&p, Complex64::new(0.0, 0.0)), p.a);
        let one = apply_pencil(&p, Complex64::new(1.0, 0.0));
        for (x, (a, b)) in one.as_slice().iter().zip(p.a.as_slice().iter().zip(p.b.as_slice())) {
            assert_eq!(*x, a + b);
        }
        let (l, m) = (Complex64::new(0.3, -1.2), Complex64::new(-2.0, 0.7));
        let diff = apply_pencil(&p, l).add_scaled(Complex64::new(-1.0, 0.0), &apply_pencil(&p, m));
        let expect = p.b.scale(l - m);
        assert!(diff.add_scaled(Complex64::new(-1.0, 0.0), &expect).max_abs() <= 1e-12 * p.b.max_abs());
    }

    #[test]
    fn weights_positive_and_rows_finite() {
        let g = make_grid(-0.4, 33).unwrap();
        for disc in [Discretization::Collocation, Discretization::Ultraspherical] {
            let p = assemble(&cylinder(), 3, &g, BoundaryClosure::Neumann, disc).unwrap();
            assert!(p.weights.iter().all(|&w| w > 0.0));
            assert!(p.a.is_finite() && p.b.is_finite());
        }
    }

    #[test]
    fn closure_rows_at_the_neck() {
        let g = make_grid(-0.4, 20).unwrap();
        let p = assemble_mode_pencil(&cylinder(), 0, &g, BoundaryClosure::Dirichlet).unwrap();
        assert_eq!(p.a[(0, 0)], Complex64::new(1.0, 0.0));
        assert!(p.b.row(0).iter().all(|z| *z == Complex64::new(0.0, 0.0)));
        let q = assemble_mode_pencil(&cylinder(), 0, &g, BoundaryClosure::Neumann).unwrap();
        assert_eq!(q.b[(0, 0)], Complex64::new(0.0, -0.5));
    }

    #[test]
    fn extending_to_the_cylinder_pole_is_an_error() {
        let g = make_grid(-1.0, 20).unwrap();
        let err = assemble_mode_pencil(&cylinder(), 0, &g, BoundaryClosure::Dirichlet).unwrap_err();
        assert!(matches!(err, AssemblyError::Geometry(GeometryError::Degenerate { .. })));
    }

    #[test]
    fn conjugation_constant_function() {
        let g = make_grid(-0.4, 64).unwrap();
        let one = |_: f64| [1.0, 0.0, 0.0];
        let r = conjugation_check(&cylinder(), 0, &g, Complex64::new(0.0, 0.0), &one, 0.05).unwrap();
        assert!(r <= 1e-8, "{r}");
    }

    #[test]
    fn conjugation_linear_function_flat_model() {
        let g = make_grid(-0.4, 32).unwrap();
        let lin = |x: f64| [x, 1.0, 0.0];
        let r = conjugation_check(&flat(), 0, &g, Complex64::new(0.4, -0.9), &lin, 0.1).unwrap();
        // roundoff of the squared differentiation matrix
        let scale = diff_matrices(&g).d2.max_abs();
        assert!(r <= 64.0 * f64::EPSILON * scale, "{r} vs {scale}");
    }

    #[test]
    fn conjugation_detects_sign_flip() {
        let g = make_grid(-0.4, 64).unwrap();
        let spec = cylinder();
        let f = spec.profile_f.clone();
        let df = spec.profile_f_deriv.clone();
        let f2 = f.clone();
        // 1/f flips the sign of gamma
        let wrong = EvenMetricSpec::new("flipped", move |t| 1.0 / f(t), move |t| -df(t) / (f2(t) * f2(t)));
        let pencil = assemble_mode_pencil(&wrong, 0, &g, BoundaryClosure::Dirichlet).unwrap();
        let one = |_: f64| [1.0, 0.0, 0.0];
        let r = conjugation_residual(&spec, &pencil, Complex64::new(0.0, 0.0), &one, 0.05).unwrap();
        assert!(r > 1e-2, "{r}");
    }

    #[test]
    fn conjugation_rejects_tiny_epsilon() {
        let g = make_grid(-0.4, 32).unwrap();
        let one = |_: f64| [1.0, 0.0, 0.0];
        let err = conjugation_check(&cylinder(), 0, &g, Complex64::new(0.0, 0.0), &one, 1e-9).unwrap_err();
        assert!(matches!(err, AssemblyError::EpsilonTooSmall { .. }));
    }

    #[test]
    fn both_discretizations_solve_the_same_problem() {
        let g = make_grid(-0.4, 60).unwrap();
        let spec = cylinder();
        let lambda = Complex64::new(0.3, -0.8);
        let f = |x: f64| (-(x - 0.6).powi(2) * 20.0).exp();
        let mut sols = Vec::new();
        for disc in [Discretization::Collocation, Discretization::Ultraspherical] {
            let p = assemble(&spec, 1, &g, BoundaryClosure::Neumann, disc).unwrap();
            let u = p.solve(lambda, &p.rhs(f)).unwrap();
            sols.push(p.nodal_values(&u));
        }
        let diff = sols[0].iter().zip(&sols[1]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-8, "{diff}");
    }
}
