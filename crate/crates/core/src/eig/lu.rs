use num_complex::Complex64;
use num_traits::Zero;

use super::matrix::DenseComplexMatrix;
use super::EigError;

/// Pivots smaller than this times the largest input entry count as zero.
const SINGULAR_PIVOT_RELATIVE: f64 = 1.0e-15;

/// LU factorization with partial pivoting, `P M = L U`.
#[derive(Debug, Clone)]
pub struct LuDecomposition {
    lu: DenseComplexMatrix,
    perm: Vec<usize>,
    input_norm_one: f64,
}

impl LuDecomposition {
    pub fn new(m: &DenseComplexMatrix) -> Result<Self, EigError> {
        if !m.is_square() {
            return Err(EigError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let n = m.nrows();
        let scale = m.max_abs();
        let input_norm_one = m.norm_one();
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();

        for col in 0..n {
            let (pivot_row, pivot_abs) = (col..n)
                .map(|r| (r, lu[(r, col)].norm()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pivot_abs > SINGULAR_PIVOT_RELATIVE * scale) {
                return Err(EigError::Singular { pivot_index: col });
            }
            lu.swap_rows(col, pivot_row);
            perm.swap(col, pivot_row);

            let pivot = lu[(col, col)];
            for r in (col + 1)..n {
                let factor = lu[(r, col)] / pivot;
                lu[(r, col)] = factor;
                if factor.is_zero() {
                    continue;
                }
                let (upper, lower) = lu.as_mut_slice().split_at_mut(r * n);
                let pivot_row = &upper[col * n..(col + 1) * n];
                let target = &mut lower[..n];
                for j in (col + 1)..n {
                    target[j] -= factor * pivot_row[j];
                }
            }
        }
        Ok(Self {
            lu,
            perm,
            input_norm_one,
        })
    }

    pub fn dimension(&self) -> usize {
        self.lu.nrows()
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>, EigError> {
        let n = self.dimension();
        if rhs.len() != n {
            return Err(EigError::DimensionMismatch {
                expected: n,
                actual: rhs.len(),
            });
        }
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| rhs[p]).collect();
        self.solve_in_place(&mut x);
        Ok(x)
    }

    fn solve_in_place(&self, x: &mut [Complex64]) {
        let n = self.dimension();
        for i in 0..n {
            let row = self.lu.row(i);
            let mut acc = x[i];
            for j in 0..i {
                acc -= row[j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= row[j] * x[j];
            }
            x[i] = acc / row[i];
        }
    }

    /// Solves `M^H x = rhs`.
    fn solve_adjoint(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = self.dimension();
        let mut y = rhs.to_vec();
        // U^H z = rhs
        for i in 0..n {
            let mut acc = y[i];
            for j in 0..i {
                acc -= self.lu[(j, i)].conj() * y[j];
            }
            y[i] = acc / self.lu[(i, i)].conj();
        }
        // L^H w = z
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in (i + 1)..n {
                acc -= self.lu[(j, i)].conj() * y[j];
            }
            y[i] = acc;
        }
        let mut x = vec![Complex64::zero(); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }

    /// Solves `M X = B` column by column.
    pub fn solve_matrix(&self, b: &DenseComplexMatrix) -> Result<DenseComplexMatrix, EigError> {
        let n = self.dimension();
        if b.nrows() != n {
            return Err(EigError::DimensionMismatch {
                expected: n,
                actual: b.nrows(),
            });
        }
        // Work on the transpose so each right-hand side is contiguous.
        let bt = b.transpose();
        let mut xt = DenseComplexMatrix::zeros(b.ncols(), n);
        for c in 0..b.ncols() {
            let src = bt.row(c);
            let dst = xt.row_mut(c);
            for (i, &p) in self.perm.iter().enumerate() {
                dst[i] = src[p];
            }
            self.solve_in_place(dst);
        }
        Ok(xt.transpose())
    }

    /// Hager/Higham estimate of the 1-norm condition number.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.dimension();
        if n == 0 {
            return 1.0;
        }
        let mut x = vec![Complex64::new(1.0 / n as f64, 0.0); n];
        let mut estimate = 0.0;
        for _ in 0..5 {
            let y = self.solve(&x).expect("dimension checked");
            let y_norm: f64 = y.iter().map(|z| z.norm()).sum();
            if y_norm <= estimate {
                break;
            }
            estimate = y_norm;
            let xi: Vec<Complex64> = y
                .iter()
                .map(|z| {
                    let a = z.norm();
                    if a > 0.0 {
                        z / a
                    } else {
                        Complex64::new(1.0, 0.0)
                    }
                })
                .collect();
            let z = self.solve_adjoint(&xi);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.norm()))
                .fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
            if zmax <= ztx {
                break;
            }
            x = vec![Complex64::zero(); n];
            x[j] = Complex64::new(1.0, 0.0);
        }
        estimate * self.input_norm_one
    }
}

/// Solves `M x = rhs` by partial-pivoting LU.
pub fn lu_solve(m: &DenseComplexMatrix, rhs: &[Complex64]) -> Result<Vec<Complex64>, EigError> {
    LuDecomposition::new(m)?.solve(rhs)
}
