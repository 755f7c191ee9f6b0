//! Banded coefficient-space operators in the ultraspherical basis.
//!
//! Vectors hold Chebyshev `T` coefficients on `[lower, upper]`; operators map
//! into the `C^(1)` or `C^(2)` bases as indicated.

use crate::eig::DenseRealMatrix;

/// `d/dx : T -> C^(1)` on an interval of half-width `h`.
pub fn d1(n: usize, h: f64) -> DenseRealMatrix {
    let mut m = DenseRealMatrix::zeros(n, n);
    for j in 1..n {
        m[(j - 1, j)] = j as f64 / h;
    }
    m
}

/// `d^2/dx^2 : T -> C^(2)`.
pub fn d2(n: usize, h: f64) -> DenseRealMatrix {
    let mut m = DenseRealMatrix::zeros(n, n);
    for j in 2..n {
        m[(j - 2, j)] = 2.0 * j as f64 / (h * h);
    }
    m
}

/// Conversion `T -> C^(1)`.
pub fn s0(n: usize) -> DenseRealMatrix {
    let mut m = DenseRealMatrix::zeros(n, n);
    for j in 0..n {
        m[(j, j)] = if j == 0 { 1.0 } else { 0.5 };
        if j >= 2 {
            m[(j - 2, j)] = -0.5;
        }
    }
    m
}

/// Conversion `C^(1) -> C^(2)`.
pub fn s1(n: usize) -> DenseRealMatrix {
    let mut m = DenseRealMatrix::zeros(n, n);
    for j in 0..n {
        let v = 1.0 / (j + 1) as f64;
        m[(j, j)] = v;
        if j >= 2 {
            m[(j - 2, j)] = -v;
        }
    }
    m
}

/// Multiplication by `sum_k coeffs[k] T_k(s)` acting on `C^(2)` coefficients,
/// truncated to `n x n`.
pub fn multiplication_c2(coeffs: &[f64], n: usize) -> DenseRealMatrix {
    let k_len = coeffs.len();
    if k_len == 0 {
        return DenseRealMatrix::zeros(n, n);
    }
    let nb = n + k_len + 2;
    let lam = 2.0;
    // Multiplication by s in C^(2), stored as its two off-diagonals.
    let lower: Vec<f64> = (0..nb).map(|j| (j + 1) as f64 / (2.0 * (j as f64 + lam))).collect();
    let upper: Vec<f64> = (0..nb)
        .map(|j| (j as f64 + 2.0 * lam - 1.0) / (2.0 * (j as f64 + lam)))
        .collect();
    // (Ms * X)[i, c] = lower[i-1] X[i-1, c] + upper[i+1] X[i+1, c]
    let apply_ms = |x: &DenseRealMatrix| -> DenseRealMatrix {
        let mut out = DenseRealMatrix::zeros(nb, nb);
        for i in 0..nb {
            let row = out.row_mut(i);
            if i >= 1 {
                let l = lower[i - 1];
                for (o, &v) in row.iter_mut().zip(x.row(i - 1)) {
                    *o += l * v;
                }
            }
            if i + 1 < nb {
                let u = upper[i + 1];
                for (o, &v) in row.iter_mut().zip(x.row(i + 1)) {
                    *o += u * v;
                }
            }
        }
        out
    };
    let mut b1 = DenseRealMatrix::zeros(nb, nb);
    let mut b2 = DenseRealMatrix::zeros(nb, nb);
    for k in (1..k_len).rev() {
        let mut b0 = apply_ms(&b1);
        for (v, &w) in b0.as_mut_slice().iter_mut().zip(b2.as_slice()) {
            *v = 2.0 * *v - w;
        }
        for i in 0..nb {
            b0[(i, i)] += coeffs[k];
        }
        b2 = b1;
        b1 = b0;
    }
    let mut m = apply_ms(&b1);
    for (v, &w) in m.as_mut_slice().iter_mut().zip(b2.as_slice()) {
        *v -= w;
    }
    for i in 0..nb {
        m[(i, i)] += coeffs[0];
    }
    m.block(n, n)
}

/// Values `T_j(1) = 1`.
pub fn right_value_row(n: usize) -> Vec<f64> {
    vec![1.0; n]
}

/// Derivatives `T_j'(1) / h = j^2 / h`.
pub fn right_derivative_row(n: usize, h: f64) -> Vec<f64> {
    (0..n).map(|j| (j * j) as f64 / h).collect()
}
