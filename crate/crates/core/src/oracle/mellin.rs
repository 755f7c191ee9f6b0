//! Least-squares fit of boundary samples to the two-branch expansion
//! `u(x) ~ sum a_j x^j + x^(i lambda) sum b_j x^j`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::OracleError;
use crate::eig::{lstsq, DenseComplexMatrix};

/// Fits need `iλ` at least this far from every integer.
pub const MIN_INTEGER_DISTANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MellinFitResult {
    pub lambda: Complex64,
    /// Smooth-branch coefficients of `x^j`.
    pub a: Vec<Complex64>,
    /// Singular-branch coefficients of `x^(i lambda + j)`.
    pub b: Vec<Complex64>,
    /// Max reconstruction error over the samples.
    pub fit_residual: f64,
    #[serde(rename = "J")]
    pub j: usize,
    /// Root-mean-square size of each branch over the samples.
    pub smooth_mass: f64,
    pub singular_mass: f64,
}

/// Distance from `z` to the nearest integer.
pub fn integer_distance(z: Complex64) -> f64 {
    (z - Complex64::new(z.re.round(), 0.0)).norm()
}

/// Shifted Chebyshev values `T_0..T_{j-1}` at `s = 2x/x_fit - 1`.
fn chebyshev_row(s: f64, j: usize) -> Vec<f64> {
    let mut t = vec![1.0; j];
    if j > 1 {
        t[1] = s;
    }
    for q in 2..j {
        t[q] = 2.0 * s * t[q - 1] - t[q - 2];
    }
    t
}

/// Monomial coefficients in `x` of `sum c_q T_q(2x/x_fit - 1)`.
fn to_monomial(c: &[Complex64], x_fit: f64) -> Vec<Complex64> {
    let j = c.len();
    // Power coefficients of T_q in s, then substitute s = 2x/x_fit - 1.
    let mut t_prev = vec![0.0; j];
    let mut t_cur = vec![0.0; j];
    let mut in_s = vec![Complex64::new(0.0, 0.0); j];
    for q in 0..j {
        let t_next: Vec<f64> = match q {
            0 => {
                let mut v = vec![0.0; j];
                v[0] = 1.0;
                v
            }
            1 => {
                let mut v = vec![0.0; j];
                v[1] = 1.0;
                v
            }
            _ => (0..j)
                .map(|p| 2.0 * if p > 0 { t_cur[p - 1] } else { 0.0 } - t_prev[p])
                .collect(),
        };
        for p in 0..j {
            in_s[p] += c[q] * t_next[p];
        }
        t_prev = std::mem::replace(&mut t_cur, t_next);
    }
    let mut out = vec![Complex64::new(0.0, 0.0); j];
    let scale = 2.0 / x_fit;
    for (p, &cp) in in_s.iter().enumerate() {
        // (scale x - 1)^p by the binomial theorem.
        let mut binom = 1.0;
        for r in 0..=p {
            let term = binom * scale.powi(r as i32) * if (p - r) % 2 == 0 { 1.0 } else { -1.0 };
            out[r] += cp * term;
            binom = binom * (p - r) as f64 / (r + 1) as f64;
        }
    }
    out
}

/// Two-branch fit with `J` terms in each branch.
pub fn mellin_fit(xs: &[f64], us: &[Complex64], lambda: Complex64, j: usize) -> Result<MellinFitResult, OracleError> {
    mellin_fit_with(xs, us, lambda, j, j)
}

/// Two-branch fit with `j_smooth >= J` smooth terms and `J` singular terms.
///
/// Singular terms `x^(i lambda + j)` of high order are approximated by
/// polynomials below roundoff, so only low orders can be identified; a longer
/// smooth branch resolves the data without letting the singular branch absorb it.
pub fn mellin_fit_with(
    xs: &[f64],
    us: &[Complex64],
    lambda: Complex64,
    j: usize,
    j_smooth: usize,
) -> Result<MellinFitResult, OracleError> {
    let il = Complex64::i() * lambda;
    if j < 2 || j_smooth < j {
        return Err(OracleError::InvalidInput(format!(
            "need 2 <= J <= smooth terms, got J = {j} and {j_smooth}"
        )));
    }
    let cols = j + j_smooth;
    if xs.len() != us.len() || xs.len() < cols {
        return Err(OracleError::InvalidInput(format!(
            "need at least {cols} samples with matching values, got {} and {}",
            xs.len(),
            us.len()
        )));
    }
    if xs.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(OracleError::InvalidInput("sample points must lie in x > 0".into()));
    }
    if integer_distance(il) < MIN_INTEGER_DISTANCE {
        return Err(OracleError::DegenerateBasis { lambda });
    }
    let x_fit = xs.iter().cloned().fold(0.0, f64::max);
    let rows: Vec<(Vec<f64>, Complex64)> = xs
        .iter()
        .map(|&x| (chebyshev_row(2.0 * x / x_fit - 1.0, j_smooth), (il * x.ln()).exp()))
        .collect();
    let count = xs.len();
    let mut m = DenseComplexMatrix::from_fn(count, cols, |r, c| {
        let (t, p) = &rows[r];
        if c < j_smooth {
            Complex64::new(t[c], 0.0)
        } else {
            p * t[c - j_smooth]
        }
    });
    let norms: Vec<f64> = (0..cols)
        .map(|c| (0..count).map(|r| m[(r, c)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    for r in 0..count {
        for c in 0..cols {
            m[(r, c)] /= norms[c];
        }
    }
    let ls = lstsq(&m, us).map_err(|_| OracleError::DegenerateBasis { lambda })?;
    let coef: Vec<Complex64> = ls.x.iter().zip(&norms).map(|(x, n)| x / n).collect();
    let (ca, cb) = coef.split_at(j_smooth);
    let mut fit_residual: f64 = 0.0;
    let (mut smooth, mut singular) = (0.0, 0.0);
    for ((t, p), u) in rows.iter().zip(us) {
        let sa: Complex64 = ca.iter().zip(t).map(|(c, tv)| c * tv).sum();
        let sb: Complex64 = cb.iter().zip(t).map(|(c, tv)| c * tv).sum::<Complex64>() * p;
        fit_residual = fit_residual.max((sa + sb - u).norm());
        smooth += sa.norm_sqr();
        singular += sb.norm_sqr();
    }
    let count = count as f64;
    Ok(MellinFitResult {
        lambda,
        a: to_monomial(ca, x_fit),
        b: to_monomial(cb, x_fit),
        fit_residual,
        j,
        smooth_mass: (smooth / count).sqrt(),
        singular_mass: (singular / count).sqrt(),
    })
}

/// `||b||_2 / ||a||_2` over the monomial coefficients.
pub fn coefficient_ratio(r: &MellinFitResult) -> f64 {
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    norm(&r.b) / norm(&r.a)
}

/// Chebyshev points of `(0, x_fit]`, excluding the origin.
pub fn sample_points(x_fit: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|q| {
            let theta = std::f64::consts::PI * (q as f64 + 0.5) / count as f64;
            x_fit * (1.0 + theta.cos()) / 2.0
        })
        .collect()
}
