use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::matrix::{normalize, vec_norm, DenseComplexMatrix};
use super::EigError;

/// Eigenpairs of a standard problem `M v = mu v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigResult {
    pub values: Vec<Complex64>,
    /// Unit 2-norm eigenvectors, parallel to `values`.
    pub vectors: Vec<Vec<Complex64>>,
    /// `||M v - mu v||_2` for each pair.
    pub residuals: Vec<f64>,
    /// Pairs whose residual exceeds the solver's acceptance level.
    pub flagged: Vec<bool>,
    pub iterations: usize,
    /// False when the QR sweep hit its iteration cap; `values` is then partial.
    pub converged: bool,
}

/// Relative residual above which a standard eigenpair is flagged.
pub const STANDARD_RESIDUAL_FLAG: f64 = 1.0e-8;

/// Iteration cap per eigenvalue used by [`qr_eigenvalues`].
pub const DEFAULT_ITERATIONS_PER_EIGENVALUE: usize = 30;

/// Householder reduction `M = Q H Q^H` with `H` upper Hessenberg.
pub fn hessenberg(m: &DenseComplexMatrix) -> Result<(DenseComplexMatrix, DenseComplexMatrix), EigError> {
    if !m.is_square() {
        return Err(EigError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let n = m.nrows();
    let mut h = m.clone();
    let mut q = DenseComplexMatrix::identity(n);
    let mut v = vec![Complex64::zero(); n];

    for k in 0..n.saturating_sub(2) {
        let alpha_norm: f64 = ((k + 1)..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        // v = x + phase*|x| e1, reflector I - 2 v v^H / (v^H v)
        for i in 0..n {
            v[i] = if i > k { h[(i, k)] } else { Complex64::zero() };
        }
        v[k + 1] += phase * alpha_norm;
        let vnorm_sq: f64 = v[(k + 1)..].iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm_sq;

        // H <- (I - tau v v^H) H
        for j in k..n {
            let mut dot = Complex64::zero();
            for i in (k + 1)..n {
                dot += v[i].conj() * h[(i, j)];
            }
            let s = dot * tau;
            for i in (k + 1)..n {
                let vi = v[i];
                h[(i, j)] -= s * vi;
            }
        }
        // H <- H (I - tau v v^H), and the same on Q
        for target in [&mut h, &mut q] {
            for i in 0..n {
                let row = target.row_mut(i);
                let mut dot = Complex64::zero();
                for j in (k + 1)..n {
                    dot += row[j] * v[j];
                }
                let s = dot * tau;
                for j in (k + 1)..n {
                    row[j] -= s * v[j].conj();
                }
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = Complex64::zero();
        }
    }
    Ok((h, q))
}

/// Rotation `[c s; -conj(s) c]` mapping `(x, y)` to `(r, 0)`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let r = ax.hypot(y.norm());
    if r == 0.0 {
        return (1.0, Complex64::zero());
    }
    if ax == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    (ax / r, (x / ax) * y.conj() / r)
}

/// Eigenvalue of the 2x2 block `[a b; c d]` closest to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half_tr = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (half_tr * half_tr - det).sqrt();
    let e1 = half_tr + disc;
    let e2 = half_tr - disc;
    if (e1 - d).norm() <= (e2 - d).norm() {
        e1
    } else {
        e2
    }
}

/// Shifted QR iteration on a Hessenberg matrix; returns eigenvalues only.
fn hessenberg_qr(mut h: DenseComplexMatrix, max_iterations: usize) -> (Vec<Complex64>, usize, bool) {
    let n = h.nrows();
    let mut values = Vec::with_capacity(n);
    if n == 0 {
        return (values, 0, true);
    }
    let scale = h.max_abs().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut total = 0usize;
    let mut since_deflation = 0usize;

    loop {
        if hi == 0 {
            values.push(h[(0, 0)]);
            break;
        }
        // Locate the start of the active unreduced block.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            let reference = if diag > 0.0 { diag } else { scale };
            if sub <= f64::EPSILON * reference {
                h[(lo, lo - 1)] = Complex64::zero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            values.push(h[(hi, hi)]);
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if total >= max_iterations {
            return (values, total, false);
        }
        total += 1;
        since_deflation += 1;

        let mu = if since_deflation % 10 == 0 {
            h[(hi, hi)] + Complex64::new(0.75, 0.5) * h[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        // Implicit single-shift bulge chase on rows/cols lo..=hi.
        let mut x = h[(lo, lo)] - mu;
        let mut y = h[(lo + 1, lo)];
        for k in lo..hi {
            if k > lo {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let (c, s) = givens(x, y);
            let col_start = if k > lo { k - 1 } else { lo };
            for j in col_start..=hi {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = a * c + s * b;
                h[(k + 1, j)] = -s.conj() * a + b * c;
            }
            if k > lo {
                h[(k + 1, k - 1)] = Complex64::zero();
            }
            let row_end = (k + 2).min(hi);
            for i in lo..=row_end {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s.conj();
                h[(i, k + 1)] = -a * s + b * c;
            }
        }
    }
    (values, total, true)
}

/// Solves `(H - mu I) x = b` for upper Hessenberg `H` in O(n^2).
fn hessenberg_shifted_solve(h: &DenseComplexMatrix, mu: Complex64, b: &[Complex64], tiny: f64) -> Vec<Complex64> {
    let n = h.nrows();
    let mut t = h.clone();
    for i in 0..n {
        t[(i, i)] -= mu;
    }
    let mut x = b.to_vec();
    for k in 0..n {
        if k + 1 < n && t[(k + 1, k)].norm() > t[(k, k)].norm() {
            t.swap_rows(k, k + 1);
            x.swap(k, k + 1);
        }
        if t[(k, k)].norm() < tiny {
            t[(k, k)] = Complex64::new(tiny, 0.0);
        }
        if k + 1 < n {
            let factor = t[(k + 1, k)] / t[(k, k)];
            if !factor.is_zero() {
                for j in k..n {
                    let tkj = t[(k, j)];
                    t[(k + 1, j)] -= factor * tkj;
                }
                let xk = x[k];
                x[k + 1] -= factor * xk;
            }
        }
    }
    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in (i + 1)..n {
            acc -= t[(i, j)] * x[j];
        }
        x[i] = acc / t[(i, i)];
    }
    x
}

/// Eigenvector of `H` for `mu` by inverse iteration, then mapped by `Q`.
fn inverse_iteration(h: &DenseComplexMatrix, q: &DenseComplexMatrix, mu: Complex64) -> Vec<Complex64> {
    let n = h.nrows();
    let norm = h.frobenius_norm().max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * norm;
    // Nudge off the exact eigenvalue so the shifted solve stays finite.
    let mu = mu + Complex64::new(tiny, tiny);
    let mut x: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0, 0.5 * ((i as f64) * 0.618).sin()))
        .collect();
    normalize(&mut x);
    for _ in 0..3 {
        x = hessenberg_shifted_solve(h, mu, &x, tiny);
        if normalize(&mut x) == 0.0 || x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            x = vec![Complex64::zero(); n];
            x[n - 1] = Complex64::new(1.0, 0.0);
        }
    }
    let mut v = q.matvec(&x);
    normalize(&mut v);
    v
}

/// All eigenvalues of `m` with eigenvectors and residuals.
pub fn qr_eigenvalues(m: &DenseComplexMatrix) -> Result<EigResult, EigError> {
    qr_eigenvalues_with_limit(m, DEFAULT_ITERATIONS_PER_EIGENVALUE * m.nrows().max(1))
}

pub fn qr_eigenvalues_with_limit(m: &DenseComplexMatrix, max_iterations: usize) -> Result<EigResult, EigError> {
    if !m.is_finite() {
        return Err(EigError::NonFinite);
    }
    let (h, q) = hessenberg(m)?;
    let (values, iterations, converged) = hessenberg_qr(h.clone(), max_iterations);
    if !converged {
        log::warn!(
            "QR iteration stopped after {iterations} sweeps with {} of {} eigenvalues",
            values.len(),
            m.nrows()
        );
    }
    let mut vectors = Vec::with_capacity(values.len());
    let mut residuals = Vec::with_capacity(values.len());
    for &mu in &values {
        let v = inverse_iteration(&h, &q, mu);
        let mv = m.matvec(&v);
        let r: Vec<Complex64> = mv.iter().zip(&v).map(|(a, b)| a - mu * b).collect();
        residuals.push(vec_norm(&r));
        vectors.push(v);
    }
    let level = STANDARD_RESIDUAL_FLAG * m.frobenius_norm().max(1.0);
    let flagged = residuals.iter().map(|&r| !(r <= level)).collect();
    Ok(EigResult {
        values,
        vectors,
        residuals,
        flagged,
        iterations,
        converged,
    })
}
