//! Discrete `L^2` eigenvalues below the continuum threshold `n^2/4`.
//!
//! Works in the distance `r` from the neck with the warp `F(r) = f(e^(-2r)) e^r`.
//! Per mode, `-Delta_g` is `-(F u')'/F + k^2/F^2 u`, discretized by cell-centred
//! differences and symmetrized to a tridiagonal matrix. The neck closure sets the
//! ghost cell, the far end is Dirichlet at `r_max`.

use serde::{Deserialize, Serialize};

use super::OracleError;
use crate::geometry::{BoundaryClosure, ModelSurface};

pub const THRESHOLD: f64 = 0.25;
/// Eigenvalues must move less than this when `r_max` doubles.
pub const TRUNCATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2Eigenvalue {
    pub energy: f64,
    pub closure: BoundaryClosure,
    /// Pencil eigenvalue `i sqrt(n^2/4 - E)`.
    pub lambda_im: f64,
}

struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

fn discretize(warp: &dyn Fn(f64) -> f64, k: i64, closure: BoundaryClosure, r_max: f64, m: usize) -> Tridiagonal {
    let h = r_max / m as f64;
    let h2 = h * h;
    let centre: Vec<f64> = (0..m).map(|i| warp((i as f64 + 0.5) * h)).collect();
    let face: Vec<f64> = (0..=m).map(|i| warp(i as f64 * h)).collect();
    let k2 = (k * k) as f64;
    let mut diag: Vec<f64> = (0..m)
        .map(|i| (face[i] + face[i + 1]) / (centre[i] * h2) + k2 / (centre[i] * centre[i]))
        .collect();
    let ghost = face[0] / (centre[0] * h2);
    match closure {
        BoundaryClosure::Neumann => diag[0] -= ghost,
        BoundaryClosure::Dirichlet => diag[0] += ghost,
    }
    diag[m - 1] += face[m] / (centre[m - 1] * h2);
    let off = (0..m - 1)
        .map(|i| -face[i + 1] / ((centre[i] * centre[i + 1]).sqrt() * h2))
        .collect();
    Tridiagonal { diag, off }
}

impl Tridiagonal {
    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.diag.len() {
            let coupling = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] / q };
            q = self.diag[i] - x - coupling;
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + x.abs());
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn lower_bound(&self) -> f64 {
        (0..self.diag.len())
            .map(|i| {
                let left = if i == 0 { 0.0 } else { self.off[i - 1].abs() };
                let right = self.off.get(i).map_or(0.0, |v| v.abs());
                self.diag[i] - left - right
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Eigenvalues below `cap`, ascending, by bisection.
    fn eigenvalues_below(&self, cap: f64) -> Vec<f64> {
        let total = self.count_below(cap);
        let floor = self.lower_bound().min(cap) - 1.0;
        (0..total)
            .map(|j| {
                let (mut lo, mut hi) = (floor, cap);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.count_below(mid) > j {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect()
    }
}

/// Richardson-extrapolated eigenvalues below the threshold for one closure.
fn extrapolated(
    warp: &dyn Fn(f64) -> f64,
    k: i64,
    closure: BoundaryClosure,
    r_max: f64,
    m: usize,
) -> Result<Vec<f64>, OracleError> {
    let levels: Vec<Vec<f64>> = [m, 2 * m, 4 * m]
        .iter()
        .map(|&mm| discretize(warp, k, closure, r_max, mm).eigenvalues_below(THRESHOLD))
        .collect();
    // Eigenvalues can cross the threshold between levels; keep those present on all.
    let count = levels.iter().map(Vec::len).min().unwrap_or(0);
    Ok((0..count)
        .map(|j| {
            let r1 = (4.0 * levels[1][j] - levels[0][j]) / 3.0;
            let r2 = (4.0 * levels[2][j] - levels[1][j]) / 3.0;
            (16.0 * r2 - r1) / 15.0
        })
        .filter(|&e| e < THRESHOLD)
        .collect())
}

fn stable(warp: &dyn Fn(f64) -> f64, k: i64, closure: BoundaryClosure, r_max: f64, m: usize) -> Result<Option<Vec<f64>>, OracleError> {
    let base = extrapolated(warp, k, closure, r_max, m)?;
    let wide = extrapolated(warp, k, closure, 2.0 * r_max, 2 * m)?;
    let agree = base.len() == wide.len() && base.iter().zip(&wide).all(|(a, b)| (a - b).abs() < TRUNCATION_TOL);
    Ok(agree.then_some(wide))
}

/// Eigenvalues `E < 1/4` of `-Delta_g` for mode `k` with the given neck closure.
///
/// `m_pts` cells cover `[0, r_max]`; refinement uses `2 m_pts` and `4 m_pts`.
pub fn l2_eigenvalues_closure(
    model: &ModelSurface,
    k: i64,
    closure: BoundaryClosure,
    r_max: f64,
    m_pts: usize,
) -> Result<Vec<L2Eigenvalue>, OracleError> {
    if !(r_max > 0.0 && r_max.is_finite()) || m_pts < 8 {
        return Err(OracleError::InvalidInput(format!("r_max = {r_max}, M = {m_pts}")));
    }
    model.validate().map_err(|e| OracleError::InvalidInput(e.to_string()))?;
    let warp = |r: f64| model.warp_in_r(r).unwrap_or(f64::NAN);
    let energies = match stable(&warp, k, closure, r_max, m_pts)? {
        Some(e) => e,
        None => stable(&warp, k, closure, 2.0 * r_max, 2 * m_pts)?.ok_or(OracleError::TruncationUnstable { r_max })?,
    };
    Ok(energies
        .into_iter()
        .map(|energy| L2Eigenvalue {
            energy,
            closure,
            lambda_im: (THRESHOLD - energy).sqrt(),
        })
        .collect())
}

/// Eigenvalues below `1/4` for mode `k` on the full reflection-symmetric surface.
pub fn l2_eigenvalues(model: &ModelSurface, k: i64, r_max: f64, m_pts: usize) -> Result<Vec<L2Eigenvalue>, OracleError> {
    let mut all = Vec::new();
    for closure in BoundaryClosure::ALL {
        all.extend(l2_eigenvalues_closure(model, k, closure, r_max, m_pts)?);
    }
    all.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(all)
}
