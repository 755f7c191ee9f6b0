//! End-to-end resonance pipeline: assemble, solve, gate, report.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::{assemble, AssemblyError, Discretization, ModePencil};
use crate::chebyshev::{make_grid, GridError};
use crate::eig::{matrix::normalize, pencil_eigs, EigError, LuDecomposition, ShiftInvertConfig};
use crate::geometry::{BoundaryClosure, GeometryError, ModelSurface};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResonanceError {
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Linear(#[from] EigError),
}

/// Closed rectangle in the `lambda` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Self {
            re_min,
            re_max,
            im_min,
            im_max,
        }
    }

    pub fn validate(&self) -> Result<(), ResonanceError> {
        let all = [self.re_min, self.re_max, self.im_min, self.im_max];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(ResonanceError::InvalidWindow("bounds must be finite".into()));
        }
        if self.re_min > self.re_max || self.im_min > self.im_max {
            return Err(ResonanceError::InvalidWindow(format!(
                "inverted bounds [{}, {}] x [{}, {}]",
                self.re_min, self.re_max, self.im_min, self.im_max
            )));
        }
        Ok(())
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (self.re_min..=self.re_max).contains(&z.re) && (self.im_min..=self.im_max).contains(&z.im)
    }

    /// Zero-area windows hold no resonances.
    pub fn is_empty(&self) -> bool {
        self.re_min >= self.re_max || self.im_min >= self.im_max
    }

    /// Inclusive test with a slack `tol` on every edge.
    pub fn contains_within(&self, z: Complex64, tol: f64) -> bool {
        self.expanded(tol).contains(z)
    }

    pub fn expanded(&self, margin: f64) -> Self {
        Self::new(
            self.re_min - margin,
            self.re_max + margin,
            self.im_min - margin,
            self.im_max + margin,
        )
    }
}

/// Inclusive range of Fourier modes; empty when `min > max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeRange {
    pub min: i64,
    pub max: i64,
}

impl ModeRange {
    pub fn new(min: i64, max: i64) -> Self {
        Self { min, max }
    }

    pub fn is_empty(&self) -> bool {
        self.min > self.max
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.min..=self.max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shifts {
    /// Tile the window with spacing `keep_radius`.
    Auto,
    Explicit(Vec<Complex64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Coarse grid size; the fine grid uses twice as many nodes.
    pub grid_n: usize,
    pub x_min: f64,
    pub closures: Vec<BoundaryClosure>,
    pub shifts: Shifts,
    pub residual_tol: f64,
    pub match_tol: f64,
    pub keep_radius: f64,
    /// Eigenvalues closer than this are merged to their mean.
    pub cluster_tol: f64,
    pub discretization: Discretization,
    pub qr_tol: f64,
}

pub const DEFAULT_SHIFT: Complex64 = Complex64::new(-1.0, -0.5);

/// Offset applied to automatic shift centers so they avoid lattice points.
pub const AUTO_SHIFT_OFFSET: Complex64 = Complex64::new(0.0123, -0.0071);

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            grid_n: 80,
            x_min: -0.4,
            closures: BoundaryClosure::ALL.to_vec(),
            shifts: Shifts::Auto,
            residual_tol: 1.0e-8,
            match_tol: 1.0e-6,
            keep_radius: 6.0,
            cluster_tol: 1.0e-4,
            discretization: Discretization::Ultraspherical,
            qr_tol: 1.0e-14,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), ResonanceError> {
        let bad = |msg: String| Err(ResonanceError::InvalidConfig(msg));
        if self.grid_n < crate::chebyshev::MIN_GRID_NODES {
            return bad(format!("grid_N = {} must be at least 16", self.grid_n));
        }
        if !(self.x_min >= -1.0 && self.x_min < 0.0) {
            return bad(format!("x_min = {} must lie in [-1, 0)", self.x_min));
        }
        for (name, v) in [
            ("residual_tol", self.residual_tol),
            ("match_tol", self.match_tol),
            ("keep_radius", self.keep_radius),
            ("cluster_tol", self.cluster_tol),
            ("qr_tol", self.qr_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} = {v} must be positive"));
            }
        }
        if self.closures.is_empty() {
            return bad("closures must not be empty".into());
        }
        if let Shifts::Explicit(s) = &self.shifts {
            if s.is_empty() || s.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return bad("shifts must be a nonempty list of finite values".into());
            }
        }
        Ok(())
    }

    /// Shift centers used for `window`.
    pub fn shift_points(&self, window: &Window) -> Vec<Complex64> {
        match &self.shifts {
            Shifts::Explicit(s) => s.clone(),
            Shifts::Auto => {
                let r = self.keep_radius;
                let axis = |lo: f64, hi: f64| -> Vec<f64> {
                    let cells = ((hi - lo) / r).ceil().max(1.0) as usize;
                    let step = (hi - lo) / cells as f64;
                    (0..cells).map(|i| lo + (i as f64 + 0.5) * step).collect()
                };
                let mut out = Vec::new();
                for &im in &axis(window.im_min, window.im_max) {
                    for &re in &axis(window.re_min, window.re_max) {
                        out.push(Complex64::new(re, im) + AUTO_SHIFT_OFFSET);
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceCandidate {
    pub lambda: Complex64,
    pub zeta: Complex64,
    pub mode_k: i64,
    pub residual: f64,
    pub match_error: f64,
    pub closure: BoundaryClosure,
    pub grid_n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSet {
    pub candidates: Vec<ResonanceCandidate>,
    pub window: Window,
    pub config: PipelineConfig,
    #[serde(default)]
    pub warnings: Vec<String>,
    /// Number of (mode, closure) problems attempted and how many failed.
    #[serde(default)]
    pub problems: usize,
    #[serde(default)]
    pub failed_problems: usize,
}

impl ResonanceSet {
    pub fn lambdas(&self) -> Vec<Complex64> {
        self.candidates.iter().map(|c| c.lambda).collect()
    }
}

/// `zeta = n/2 - i lambda`.
pub fn lambda_to_zeta(lambda: Complex64, n: u32) -> Complex64 {
    Complex64::new(n as f64 / 2.0, 0.0) - Complex64::i() * lambda
}

/// `lambda = i (zeta - n/2)`.
pub fn zeta_to_lambda(zeta: Complex64, n: u32) -> Complex64 {
    Complex64::i() * (zeta - Complex64::new(n as f64 / 2.0, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdInfo {
    pub lambda: Complex64,
    pub s_plus: f64,
    pub s_minus: f64,
    pub rho: f64,
}

/// Sobolev thresholds at the radial sets for `P(lambda)`.
pub fn threshold_report(lambda: Complex64) -> ThresholdInfo {
    let s = -lambda.im - 0.5;
    ThresholdInfo {
        lambda,
        s_plus: s,
        s_minus: s,
        rho: lambda.im,
    }
}

#[derive(Debug, Clone, Copy)]
struct Eigen {
    lambda: Complex64,
    residual: f64,
    /// Distance to the shift that produced it.
    shift_distance: f64,
}

/// Merges eigenvalues within `tol` (single linkage) to their mean.
fn cluster(mut values: Vec<Eigen>, tol: f64) -> Vec<Eigen> {
    values.sort_by(|a, b| a.lambda.re.total_cmp(&b.lambda.re));
    let mut used = vec![false; values.len()];
    let mut out = Vec::new();
    for i in 0..values.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut group = vec![i];
        let mut cursor = 0;
        while cursor < group.len() {
            let anchor = values[group[cursor]].lambda;
            for j in 0..values.len() {
                if !used[j] && (values[j].lambda - anchor).norm() < tol {
                    used[j] = true;
                    group.push(j);
                }
            }
            cursor += 1;
        }
        let count = group.len() as f64;
        let mean = group.iter().map(|&g| values[g].lambda).sum::<Complex64>() / count;
        let residual = group.iter().map(|&g| values[g].residual).fold(0.0, f64::max);
        let shift_distance = group.iter().map(|&g| values[g].shift_distance).fold(f64::INFINITY, f64::min);
        out.push(Eigen {
            lambda: mean,
            residual,
            shift_distance,
        });
    }
    out
}

/// Union over shifts; duplicates keep the copy nearest its shift.
fn merge_shifts(per_shift: Vec<Vec<Eigen>>, tol: f64) -> Vec<Eigen> {
    let mut merged: Vec<Eigen> = Vec::new();
    for list in per_shift {
        for e in list {
            match merged.iter_mut().find(|m| (m.lambda - e.lambda).norm() < tol) {
                Some(m) if e.shift_distance < m.shift_distance => *m = e,
                Some(_) => {}
                None => merged.push(e),
            }
        }
    }
    merged
}

/// Greedy nearest-neighbour matching; returns `(fine index, distance)`.
fn greedy_match(fine: &[Eigen], coarse: &[Eigen]) -> Vec<(usize, f64)> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, f) in fine.iter().enumerate() {
        for (j, c) in coarse.iter().enumerate() {
            pairs.push(((f.lambda - c.lambda).norm(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut fine_used = vec![false; fine.len()];
    let mut coarse_used = vec![false; coarse.len()];
    let mut out = Vec::new();
    for (d, i, j) in pairs {
        if fine_used[i] || coarse_used[j] {
            continue;
        }
        fine_used[i] = true;
        coarse_used[j] = true;
        out.push((i, d));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Problem {
    abs_k: i64,
    closure: BoundaryClosure,
}

/// Solves one pencil at one shift, nudging the shift once on failure.
fn solve_at_shift(p: &ModePencil, sigma: Complex64, cfg: &PipelineConfig) -> (Vec<Eigen>, Option<String>) {
    let mut warning = None;
    let mut si = ShiftInvertConfig {
        sigma,
        keep_radius: cfg.keep_radius,
        qr_tol: cfg.qr_tol,
        residual_flag: cfg.residual_tol,
        ..ShiftInvertConfig::default()
    };
    let mut result = pencil_eigs(p, &si);
    if let Err(EigError::ShiftFailure { .. }) = result {
        let nudged = sigma + Complex64::from_polar(0.05, 0.6);
        warning = Some(format!(
            "mode {} {} N={}: shift {sigma} unusable, retried at {nudged}",
            p.k,
            p.closure,
            p.dimension()
        ));
        si.sigma = nudged;
        result = pencil_eigs(p, &si);
    }
    match result {
        Ok(r) => {
            if !r.converged {
                warning = Some(format!(
                    "mode {} {} N={}: QR stopped early at shift {}",
                    p.k,
                    p.closure,
                    p.dimension(),
                    si.sigma
                ));
            }
            let list = r
                .values
                .iter()
                .zip(&r.residuals)
                .map(|(&lambda, &residual)| Eigen {
                    lambda,
                    residual,
                    shift_distance: (lambda - si.sigma).norm(),
                })
                .collect();
            (cluster(list, cfg.cluster_tol), warning)
        }
        Err(e) => (
            Vec::new(),
            Some(format!(
                "mode {} {} N={}: {e}",
                p.k,
                p.closure,
                p.dimension()
            )),
        ),
    }
}

/// Runs the two-grid pipeline over `modes` and both requested closures.
///
/// Modes `k` and `-k` share one computation since the operator depends on `k^2`.
pub fn compute_resonances(
    model: &ModelSurface,
    modes: ModeRange,
    window: &Window,
    cfg: &PipelineConfig,
) -> Result<ResonanceSet, ResonanceError> {
    window.validate()?;
    cfg.validate()?;
    let spec = model.spec()?;
    let mut set = ResonanceSet {
        candidates: Vec::new(),
        window: *window,
        config: cfg.clone(),
        warnings: Vec::new(),
        problems: 0,
        failed_problems: 0,
    };
    if modes.is_empty() || window.is_empty() {
        return Ok(set);
    }
    let grids = [make_grid(cfg.x_min, cfg.grid_n)?, make_grid(cfg.x_min, 2 * cfg.grid_n)?];
    let shifts = cfg.shift_points(window);

    let mut problems: Vec<Problem> = modes
        .iter()
        .flat_map(|k| cfg.closures.iter().map(move |&closure| Problem { abs_k: k.abs(), closure }))
        .collect();
    problems.sort();
    problems.dedup();

    // Assemble every (problem, grid) pencil, then solve each at every shift.
    let pencils: Vec<(Problem, usize, Result<ModePencil, AssemblyError>)> = problems
        .par_iter()
        .flat_map_iter(|&pb| {
            let spec = &spec;
            grids.iter().enumerate().map(move |(level, g)| {
                (pb, level, assemble(spec, pb.abs_k, g, pb.closure, cfg.discretization))
            })
        })
        .collect();
    let jobs: Vec<(usize, Complex64)> = (0..pencils.len())
        .flat_map(|i| shifts.iter().map(move |&s| (i, s)))
        .filter(|(i, _)| pencils[*i].2.is_ok())
        .collect();
    let solved: Vec<(usize, Vec<Eigen>, Option<String>)> = jobs
        .par_iter()
        .map(|&(i, sigma)| {
            let p = pencils[i].2.as_ref().expect("filtered");
            let (eigs, warning) = solve_at_shift(p, sigma, cfg);
            (i, eigs, warning)
        })
        .collect();

    let mut by_level: BTreeMap<(Problem, usize), Vec<Vec<Eigen>>> = BTreeMap::new();
    let mut broken: BTreeMap<Problem, bool> = BTreeMap::new();
    for (pb, _, res) in &pencils {
        if let Err(e) = res {
            set.warnings.push(format!("mode {} {}: {e}", pb.abs_k, pb.closure));
            broken.insert(*pb, true);
        }
    }
    for (i, eigs, warning) in solved {
        let (pb, level, _) = &pencils[i];
        if let Some(w) = warning {
            set.warnings.push(w);
        }
        by_level.entry((*pb, *level)).or_default().push(eigs);
    }

    for pb in &problems {
        set.problems += 1;
        let coarse = by_level.remove(&(*pb, 0));
        let fine = by_level.remove(&(*pb, 1));
        let (coarse, fine) = match (coarse, fine) {
            (Some(c), Some(f)) if !broken.contains_key(pb) => (c, f),
            _ => {
                set.failed_problems += 1;
                continue;
            }
        };
        if coarse.iter().all(Vec::is_empty) && fine.iter().all(Vec::is_empty) {
            set.failed_problems += 1;
            continue;
        }
        let coarse = merge_shifts(coarse, cfg.cluster_tol);
        let fine = merge_shifts(fine, cfg.cluster_tol);
        let mut accepted: Vec<(Eigen, f64)> = Vec::new();
        for (i, d) in greedy_match(&fine, &coarse) {
            let e = fine[i];
            if d <= cfg.match_tol && e.residual <= cfg.residual_tol && window.contains_within(e.lambda, cfg.match_tol) {
                accepted.push((e, d));
            }
        }
        // Deduplicate within each (mode, closure).
        let mut kept: Vec<(Eigen, f64)> = Vec::new();
        for (e, d) in accepted {
            if !kept.iter().any(|(k, _)| (k.lambda - e.lambda).norm() < cfg.match_tol) {
                kept.push((e, d));
            }
        }
        for k in modes.iter().filter(|k| k.abs() == pb.abs_k) {
            for (e, d) in &kept {
                set.candidates.push(ResonanceCandidate {
                    lambda: e.lambda,
                    zeta: lambda_to_zeta(e.lambda, spec.n),
                    mode_k: k,
                    residual: e.residual,
                    match_error: *d,
                    closure: pb.closure,
                    grid_n: 2 * cfg.grid_n,
                });
            }
        }
    }
    sort_candidates(&mut set.candidates);
    Ok(set)
}

/// Stable ordering by `(mode_k, Re lambda, Im lambda, closure)`.
pub fn sort_candidates(c: &mut [ResonanceCandidate]) {
    c.sort_by(|a, b| {
        a.mode_k
            .cmp(&b.mode_k)
            .then(a.lambda.re.total_cmp(&b.lambda.re))
            .then(a.lambda.im.total_cmp(&b.lambda.im))
            .then(a.closure.cmp(&b.closure))
    });
}

/// Pencil and unit eigenvector for a reported candidate.
pub fn resonant_state(
    model: &ModelSurface,
    candidate: &ResonanceCandidate,
    cfg: &PipelineConfig,
) -> Result<(ModePencil, Vec<Complex64>), ResonanceError> {
    let spec = model.spec()?;
    let grid = make_grid(cfg.x_min, candidate.grid_n)?;
    let p = assemble(&spec, candidate.mode_k, &grid, candidate.closure, cfg.discretization)?;
    let mu = candidate.lambda + Complex64::new(1.0e-10, 1.0e-10) * (1.0 + candidate.lambda.norm());
    let lu = LuDecomposition::new(&p.a.add_scaled(mu, &p.b))?;
    let mut v: Vec<Complex64> = (0..p.dimension())
        .map(|i| Complex64::new(1.0, 0.3 * (i as f64).cos()))
        .collect();
    normalize(&mut v);
    for _ in 0..4 {
        v = lu.solve(&p.b.matvec(&v))?;
        normalize(&mut v);
    }
    Ok((p, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_conversions() {
        assert_eq!(lambda_to_zeta(Complex64::new(0.0, 0.0), 1), Complex64::new(0.5, 0.0));
        assert_eq!(lambda_to_zeta(Complex64::new(0.0, -1.0), 1), Complex64::new(-0.5, 0.0));
        let l = Complex64::new(0.7, -2.3);
        assert_eq!(zeta_to_lambda(lambda_to_zeta(l, 1), 1), l);
    }

    #[test]
    fn thresholds() {
        assert_eq!(threshold_report(Complex64::new(0.0, 0.0)).s_plus, -0.5);
        assert_eq!(threshold_report(Complex64::new(0.0, -2.0)).s_plus, 1.5);
        let t = threshold_report(Complex64::new(5.0, 0.0));
        assert_eq!((t.s_plus, t.s_minus, t.rho), (-0.5, -0.5, 0.0));
    }

    #[test]
    fn window_semantics() {
        let w = Window::new(-1.0, 1.0, -1.0, 0.0);
        assert!(w.contains(Complex64::new(1.0, 0.0)));
        assert!(!w.contains(Complex64::new(1.0, 0.1)));
        assert!(Window::new(0.0, 0.0, 0.0, 0.0).is_empty());
        assert!(Window::new(1.0, 0.0, 0.0, 1.0).validate().is_err());
    }

    #[test]
    fn cluster_merges_split_doubles() {
        let e = |re: f64| Eigen {
            lambda: Complex64::new(re, -0.5),
            residual: 1e-14,
            shift_distance: 1.0,
        };
        let out = cluster(vec![e(1e-6), e(-1e-6), e(2.0)], 1e-4);
        assert_eq!(out.len(), 2);
        assert!(out.iter().any(|c| (c.lambda - Complex64::new(0.0, -0.5)).norm() < 1e-15));
    }

    #[test]
    fn greedy_matching_pairs_nearest_first() {
        let e = |re: f64| Eigen {
            lambda: Complex64::new(re, 0.0),
            residual: 0.0,
            shift_distance: 0.0,
        };
        let m = greedy_match(&[e(0.0), e(1.0)], &[e(0.9), e(0.05)]);
        assert_eq!(m.len(), 2);
        assert!(m.iter().any(|&(i, d)| i == 0 && (d - 0.05).abs() < 1e-15));
    }

    #[test]
    fn auto_shifts_cover_window() {
        let cfg = PipelineConfig::default();
        let w = Window::new(-4.0, 4.0, -3.0, 0.5);
        let s = cfg.shift_points(&w);
        for i in 0..=40 {
            for j in 0..=35 {
                let z = Complex64::new(-4.0 + 0.2 * i as f64, -3.0 + 0.1 * j as f64);
                assert!(s.iter().any(|c| (c - z).norm() <= cfg.keep_radius));
            }
        }
    }

    #[test]
    fn empty_mode_range_yields_nothing() {
        let set = compute_resonances(
            &ModelSurface::HyperbolicCylinder { ell: 1.0 },
            ModeRange::new(1, 0),
            &Window::new(-1.0, 1.0, -1.0, 0.0),
            &PipelineConfig::default(),
        )
        .unwrap();
        assert!(set.candidates.is_empty());
    }
}
