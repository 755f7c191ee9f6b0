//! Named batches of oracle checks, as run by `verify`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Rational64;

use super::adjoint::{adjoint_defect, bump};
use super::cylinder::{cylinder_resonances_exact, ExactResonance};
use super::delta::{delta_identity_pairing, leading_coefficient, Exact};
use super::kernel::{indicial_coefficient, model_kernel_residual};
use super::l2::{l2_eigenvalues, l2_eigenvalues_closure};
use super::mellin::{coefficient_ratio, mellin_fit, mellin_fit_with, sample_points};
use super::ode::ode_continue_negative;
use super::{OracleError, OracleKind, OracleReport};
use crate::assembly::{apply_pencil, assemble, assemble_mode_pencil, Discretization};
use crate::chebyshev::{make_grid, Grid};
use crate::geometry::{BoundaryClosure, EvenMetricSpec, ModelSurface};
use crate::resonance::{compute_resonances, resonant_state, ModeRange, PipelineConfig, ResonanceCandidate, Window};

pub const SUITES: [&str; 9] = ["all", "kernel", "indicial", "delta", "adjoint", "ode", "mellin", "l2", "cylinder"];

/// Surface with a bound state below the continuum, Neumann mode 0.
pub fn bound_state_fixture() -> ModelSurface {
    ModelSurface::PerturbedCylinder {
        ell: 2.0 * PI,
        a: 10.0,
        w: 0.5,
    }
}

pub fn cylinder_fixture() -> ModelSurface {
    ModelSurface::HyperbolicCylinder { ell: 2.0 * PI }
}

pub fn resonance_window() -> Window {
    Window::new(-4.0, 4.0, -3.0, 0.5)
}

/// Result of pairing pipeline candidates with exact values.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub max_error: f64,
    pub unmatched_pipeline: Vec<Complex64>,
    pub unmatched_exact: Vec<Complex64>,
    pub matched: usize,
}

/// Greedy pairing within each closure; pairs farther than `tol` stay unmatched.
pub fn compare_with_exact(candidates: &[ResonanceCandidate], exact: &[ExactResonance], tol: f64) -> Comparison {
    let mut out = Comparison {
        max_error: 0.0,
        unmatched_pipeline: Vec::new(),
        unmatched_exact: Vec::new(),
        matched: 0,
    };
    for closure in BoundaryClosure::ALL {
        let p: Vec<Complex64> = candidates.iter().filter(|c| c.closure == closure).map(|c| c.lambda).collect();
        let e: Vec<Complex64> = exact.iter().filter(|c| c.closure == closure).map(|c| c.lambda).collect();
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (i, a) in p.iter().enumerate() {
            for (j, b) in e.iter().enumerate() {
                pairs.push(((a - b).norm(), i, j));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (mut pu, mut eu) = (vec![false; p.len()], vec![false; e.len()]);
        for (d, i, j) in pairs {
            if d > tol || pu[i] || eu[j] {
                continue;
            }
            pu[i] = true;
            eu[j] = true;
            out.matched += 1;
            out.max_error = out.max_error.max(d);
        }
        out.unmatched_pipeline.extend(p.iter().zip(&pu).filter(|(_, u)| !**u).map(|(z, _)| *z));
        out.unmatched_exact.extend(e.iter().zip(&eu).filter(|(_, u)| !**u).map(|(z, _)| *z));
    }
    out
}

pub fn kernel() -> Result<Vec<OracleReport>, OracleError> {
    let grid = Grid::chebyshev(0.2, 1.0, 64).map_err(|e| OracleError::InvalidInput(e.to_string()))?;
    let mut out = Vec::new();
    for rho in [0.3, 0.7, 1.3] {
        let r = model_kernel_residual(rho, &grid)?;
        out.push(OracleReport::new(OracleKind::ExactKernel, r.symbolic, 0.0, format!("symbolic rho={rho}")));
        out.push(OracleReport::new(OracleKind::ExactKernel, r.discrete, 1e-8, format!("discrete rho={rho} N=64")));
    }
    Ok(out)
}

fn flat_spec() -> EvenMetricSpec {
    EvenMetricSpec::new("flat", |_| 1.0, |_| 0.0)
}

pub fn indicial() -> Result<Vec<OracleReport>, OracleError> {
    let mut out = Vec::new();
    let lambda = Complex64::new(0.8, -1.3);
    let roots = [Complex64::new(0.0, 0.0), Complex64::i() * lambda];
    let worst = roots.iter().map(|&s| indicial_coefficient(lambda, s).norm()).fold(0.0, f64::max);
    out.push(OracleReport::new(OracleKind::Indicial, worst, 0.0, "roots {0, i lambda}"));
    let coincidence = indicial_coefficient(Complex64::new(0.0, -1.0), Complex64::new(1.0, 0.0)).norm();
    out.push(OracleReport::new(OracleKind::Indicial, coincidence, 0.0, "lambda=-i, s=1"));

    let grid = make_grid(-0.4, 32).map_err(|e| OracleError::InvalidInput(e.to_string()))?;
    let p = assemble_mode_pencil(&flat_spec(), 0, &grid, BoundaryClosure::Dirichlet)
        .map_err(|e| OracleError::InvalidInput(e.to_string()))?;
    let m = apply_pencil(&p, lambda);
    let mut worst: f64 = 0.0;
    for s in 1..=6i32 {
        let u: Vec<Complex64> = grid.nodes.iter().map(|&x| Complex64::new(x.powi(s), 0.0)).collect();
        let pu = m.matvec(&u);
        let coef = indicial_coefficient(lambda, Complex64::new(s as f64, 0.0));
        for (j, &x) in grid.nodes.iter().enumerate().skip(1) {
            worst = worst.max((pu[j] - coef * x.powi(s - 1)).norm() / coef.norm());
        }
    }
    out.push(OracleReport::new(OracleKind::Indicial, worst, 1e-10, "discrete x^s, s=1..6, N=32"));
    Ok(out)
}

pub fn delta() -> Result<Vec<OracleReport>, OracleError> {
    let int = |re: i64, im: i64| Exact::new(Rational64::from_integer(re), Rational64::from_integer(im));
    let phi: Vec<Exact> = vec![int(2, 1), int(-1, 0), int(3, -2), int(0, 1), int(5, 0), int(-1, 4)];
    let mut out = Vec::new();
    for k in 0..3 {
        for (name, lambda) in [("i", int(0, 1)), ("2i", int(0, 2)), ("1+i", int(1, 1))] {
            for g in [0, -2] {
                let (lhs, rhs) = delta_identity_pairing(k, lambda, Rational64::from_integer(g), &phi)?;
                let measured = if lhs == rhs { 0.0 } else { 1.0 };
                out.push(OracleReport::new(
                    OracleKind::DeltaIdentity,
                    measured,
                    0.0,
                    format!("k={k} lambda={name} gamma0={g}"),
                ));
            }
            let lead = leading_coefficient(k, lambda);
            let vanishes = if lead == int(0, 0) { 1.0 } else { 0.0 };
            out.push(OracleReport::new(
                OracleKind::DeltaIdentity,
                vanishes,
                0.0,
                format!("k={k} lambda={name} leading coefficient nonzero"),
            ));
        }
    }
    Ok(out)
}

type Pair = (Arc<dyn Fn(f64) -> f64 + Send + Sync>, Arc<dyn Fn(f64) -> f64 + Send + Sync>);

/// Test-function pairs vanishing to infinite order at both ends of `[-0.4, 1]`.
pub fn adjoint_pairs() -> Vec<Pair> {
    vec![
        (
            Arc::new(|x| bump(-0.4, 1.0, x) * (3.0 * x).cos()),
            Arc::new(|x| bump(-0.4, 1.0, x) * (1.0 + x * x)),
        ),
        (Arc::new(|x| bump(-0.4, 1.0, x)), Arc::new(|x| bump(-0.4, 1.0, x) * x.exp())),
        (
            Arc::new(|x| bump(-0.3, 0.9, x) * (2.0 * x).sin()),
            Arc::new(|x| bump(-0.4, 1.0, x) * (x - 0.3)),
        ),
    ]
}

pub const ADJOINT_FLOOR: f64 = 1e-10;

/// Worst halving ratio `E(2N)/E(N)` over `N = 32, 64`, ignoring steps that start at the floor.
pub fn adjoint_ratio(spec: &EvenMetricSpec, k: i64, lambda: Complex64, pair: &Pair) -> Result<(f64, [f64; 3]), OracleError> {
    let mut e = [0.0; 3];
    for (slot, n) in e.iter_mut().zip([32, 64, 128]) {
        *slot = adjoint_defect(spec, k, -0.4, n, lambda, &*pair.0, &*pair.1)?;
    }
    let mut worst: f64 = 0.0;
    for w in e.windows(2) {
        if w[0] > ADJOINT_FLOOR {
            worst = worst.max(w[1] / w[0]);
        }
    }
    Ok((worst, e))
}

/// Fixed pseudo-random spectral parameters.
pub fn adjoint_lambdas() -> [Complex64; 5] {
    [
        Complex64::new(0.7, -1.2),
        Complex64::new(-2.0, 0.3),
        Complex64::new(3.1, -2.5),
        Complex64::new(-0.4, -0.9),
        Complex64::new(1.6, 1.1),
    ]
}

pub fn adjoint() -> Result<Vec<OracleReport>, OracleError> {
    let spec = cylinder_fixture().spec().map_err(|e| OracleError::InvalidInput(e.to_string()))?;
    let mut out = Vec::new();
    for lambda in adjoint_lambdas() {
        let mut worst: f64 = 0.0;
        for pair in adjoint_pairs() {
            worst = worst.max(adjoint_ratio(&spec, 1, lambda, &pair)?.0);
        }
        out.push(OracleReport::new(OracleKind::AdjointSymmetry, worst, 0.5, format!("lambda={lambda} N=32,64,128")));
    }
    Ok(out)
}

/// `(lambda, left edge of the forcing support)` for the continuation check.
pub fn ode_fixtures() -> [(Complex64, f64); 3] {
    [
        (Complex64::new(-1.0, -1.0), 0.2),
        (Complex64::new(0.5, -0.3), 0.3),
        (Complex64::new(2.0, 0.5), 0.25),
    ]
}

/// Max mismatch on `[x_min + 0.05, -0.05]` between the global solution and its continuation.
pub fn ode_mismatch(lambda: Complex64, support: f64, n: usize) -> Result<f64, OracleError> {
    let x_min = -0.4;
    let model = cylinder_fixture();
    let spec = model.spec().map_err(|e| OracleError::InvalidInput(e.to_string()))?;
    let grid = make_grid(x_min, n).map_err(|e| OracleError::InvalidInput(e.to_string()))?;
    let p = assemble(&spec, 0, &grid, BoundaryClosure::Neumann, Discretization::Collocation)
        .map_err(|e| OracleError::InvalidInput(e.to_string()))?;
    let forcing = move |x: f64| if x > support { (x - support).powi(8) * (1.0 + x) } else { 0.0 };
    let u = p
        .solve(lambda, &p.rhs(forcing))
        .map_err(|e| OracleError::InvalidInput(e.to_string()))?;
    let series = p.series(&u);
    let slope = series.derivative();
    let start = -0.05;
    let xs: Vec<f64> = (0..64).map(|j| start - (start - (x_min + 0.05)) * j as f64 / 63.0).collect();
    let sol = ode_continue_negative(&spec, 0, lambda, start, (series.eval(start), slope.eval(start)), None, &xs)?;
    Ok(xs.iter().zip(&sol.u).map(|(&x, v)| (series.eval(x) - v).norm()).fold(0.0, f64::max))
}

pub fn ode() -> Result<Vec<OracleReport>, OracleError> {
    ode_fixtures()
        .iter()
        .map(|&(lambda, support)| {
            let m = ode_mismatch(lambda, support, 96)?;
            Ok(OracleReport::new(
                OracleKind::ODEContinuation,
                m,
                1e-6,
                format!("lambda={lambda} f supported in x>{support} N=96"),
            ))
        })
        .collect()
}

/// Singular terms identified in eigenvector fits, and smooth terms beside them.
pub const EIGENVECTOR_FIT_J: usize = 2;
pub const EIGENVECTOR_FIT_SMOOTH: usize = 16;

/// `||b|| / ||a||` for the resonant state of `candidate` on `(0, 0.5]`, or `None` when
/// `i lambda` is within 0.1 of an integer.
pub fn eigenvector_singular_ratio(
    model: &ModelSurface,
    candidate: &ResonanceCandidate,
    cfg: &PipelineConfig,
) -> Result<Option<f64>, OracleError> {
    if super::mellin::integer_distance(Complex64::i() * candidate.lambda) < 0.1 {
        return Ok(None);
    }
    let (p, v) = resonant_state(model, candidate, cfg).map_err(|e| OracleError::InvalidInput(e.to_string()))?;
    let series = p.series(&v);
    let xs = sample_points(0.5, 64);
    let us: Vec<Complex64> = xs.iter().map(|&x| series.eval(x)).collect();
    let fit = mellin_fit_with(&xs, &us, candidate.lambda, EIGENVECTOR_FIT_J, EIGENVECTOR_FIT_SMOOTH)?;
    Ok(Some(coefficient_ratio(&fit)))
}

pub fn mellin() -> Result<Vec<OracleReport>, OracleError> {
    let mut out = Vec::new();
    let xs = sample_points(0.5, 40);
    let lambda = Complex64::new(0.9, -0.6);
    let il = Complex64::i() * lambda;
    let a = [Complex64::new(1.0, 0.5), Complex64::new(-2.0, 0.0), Complex64::new(0.3, 0.1)];
    let b = [Complex64::new(0.7, -0.2), Complex64::new(0.0, 1.5), Complex64::new(-0.4, 0.0)];
    let us: Vec<Complex64> = xs
        .iter()
        .map(|&x| {
            let pw = (il * x.ln()).exp();
            (0..3).map(|j| (a[j] + b[j] * pw) * x.powi(j as i32)).sum()
        })
        .collect();
    let fit = mellin_fit(&xs, &us, lambda, 3)?;
    let err = (0..3)
        .map(|j| ((fit.a[j] - a[j]).norm() / a[j].norm()).max((fit.b[j] - b[j]).norm() / b[j].norm()))
        .fold(0.0, f64::max);
    out.push(OracleReport::new(OracleKind::MellinFit, err, 1e-8, "manufactured two-branch sum, J=3"));

    let model = cylinder_fixture();
    let cfg = PipelineConfig::default();
    let set = compute_resonances(&model, ModeRange::new(0, 2), &resonance_window(), &cfg)
        .map_err(|e| OracleError::InvalidInput(e.to_string()))?;
    let mut worst: f64 = 0.0;
    let mut fitted = 0;
    for c in &set.candidates {
        if let Some(r) = eigenvector_singular_ratio(&model, c, &cfg)? {
            worst = worst.max(r);
            fitted += 1;
        }
    }
    if fitted == 0 {
        worst = f64::NAN;
    }
    out.push(OracleReport::new(
        OracleKind::MellinFit,
        worst,
        1e-6,
        format!("cylinder resonant states, {fitted} fits, ||b||/||a||"),
    ));
    Ok(out)
}

pub fn l2() -> Result<Vec<OracleReport>, OracleError> {
    let mut out = Vec::new();
    let cylinder = cylinder_fixture();
    let mut found = 0;
    for k in 0..3 {
        found += l2_eigenvalues(&cylinder, k, 30.0, 1500)?.len();
    }
    out.push(OracleReport::new(OracleKind::L2Spectrum, found as f64, 0.0, "cylinder eigenvalues below 1/4, |k|<=2"));

    let model = bound_state_fixture();
    let e = l2_eigenvalues_closure(&model, 0, BoundaryClosure::Neumann, 40.0, 2000)?;
    let target = e
        .first()
        .ok_or_else(|| OracleError::InvalidInput("fixture has no bound state".into()))?;
    let set = compute_resonances(
        &model,
        ModeRange::new(0, 0),
        &Window::new(-0.5, 0.5, 0.01, 0.5),
        &PipelineConfig::default(),
    )
    .map_err(|e| OracleError::InvalidInput(e.to_string()))?;
    let predicted = Complex64::new(0.0, target.lambda_im);
    let err = set
        .candidates
        .iter()
        .map(|c| (c.lambda - predicted).norm())
        .fold(f64::INFINITY, f64::min);
    out.push(OracleReport::new(
        OracleKind::L2Spectrum,
        err,
        1e-6,
        format!("bound state E={:.10} vs pipeline", target.energy),
    ));
    Ok(out)
}

pub fn cylinder() -> Result<Vec<OracleReport>, OracleError> {
    let model = cylinder_fixture();
    let window = resonance_window();
    let set = compute_resonances(&model, ModeRange::new(-4, 4), &window, &PipelineConfig::default())
        .map_err(|e| OracleError::InvalidInput(e.to_string()))?;
    let mut worst: f64 = 0.0;
    let mut unmatched = 0;
    for k in -4..=4 {
        let exact = cylinder_resonances_exact(2.0 * PI, k, &window)?;
        let cands: Vec<ResonanceCandidate> = set.candidates.iter().filter(|c| c.mode_k == k).cloned().collect();
        let cmp = compare_with_exact(&cands, &exact, 1e-6);
        worst = worst.max(cmp.max_error);
        unmatched += cmp.unmatched_exact.len() + cmp.unmatched_pipeline.len();
    }
    Ok(vec![
        OracleReport::new(OracleKind::CylinderExact, worst, 1e-6, "ell=2pi |k|<=4, N=80/160"),
        OracleReport::new(OracleKind::CylinderExact, unmatched as f64, 0.0, "unmatched candidates"),
    ])
}

/// Runs the named suite; `all` runs every suite in order.
pub fn run_suite(name: &str) -> Result<Vec<OracleReport>, OracleError> {
    match name {
        "all" => {
            let mut out = Vec::new();
            for s in &SUITES[1..] {
                out.extend(run_suite(s)?);
            }
            Ok(out)
        }
        "kernel" => kernel(),
        "indicial" => indicial(),
        "delta" => delta(),
        "adjoint" => adjoint(),
        "ode" => ode(),
        "mellin" => mellin(),
        "l2" => l2(),
        "cylinder" => cylinder(),
        other => Err(OracleError::UnknownSuite(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_suites_pass() {
        for name in ["kernel", "indicial", "delta", "adjoint", "ode"] {
            for r in run_suite(name).unwrap() {
                assert!(r.pass, "{name}: {r:?}");
            }
        }
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(matches!(run_suite("bogus"), Err(OracleError::UnknownSuite(_))));
    }

    #[test]
    fn comparison_counts_unmatched() {
        let cand = |re: f64| ResonanceCandidate {
            lambda: Complex64::new(re, -0.5),
            zeta: Complex64::new(0.0, 0.0),
            mode_k: 1,
            residual: 0.0,
            match_error: 0.0,
            closure: BoundaryClosure::Neumann,
            grid_n: 32,
        };
        let exact = [ExactResonance {
            lambda: Complex64::new(1.0, -0.5),
            closure: BoundaryClosure::Neumann,
            multiplicity: 1,
        }];
        let c = compare_with_exact(&[cand(1.0 + 1e-9), cand(3.0)], &exact, 1e-6);
        assert_eq!((c.matched, c.unmatched_pipeline.len(), c.unmatched_exact.len()), (1, 1, 0));
    }
}
