use std::f64::consts::TAU;

use num_complex::Complex64;
use num_rational::Rational64;
use proptest::prelude::*;

use resonant::assembly::{apply_pencil, assemble, Discretization};
use resonant::chebyshev::{make_grid, Grid};
use resonant::eig::matrix::DenseComplexMatrix;
use resonant::eig::pencil::{pencil_eigs_ab, ShiftInvertConfig};
use resonant::eig::qr::qr_eigenvalues;
use resonant::geometry::{BoundaryClosure, ModelSurface};
use resonant::oracle::delta::{delta_identity_pairing, leading_coefficient, Exact};
use resonant::oracle::kernel::model_kernel_residual;
use resonant::oracle::mellin::{integer_distance, mellin_fit, sample_points};
use resonant::oracle::ode::ode_continue_negative;
use resonant::resonance::{
    compute_resonances, lambda_to_zeta, zeta_to_lambda, ModeRange, PipelineConfig, ResonanceCandidate, ResonanceSet,
    Window,
};

fn complex(lo: f64, hi: f64) -> impl Strategy<Value = Complex64> {
    (lo..hi, lo..hi).prop_map(|(re, im)| Complex64::new(re, im))
}

fn model() -> impl Strategy<Value = ModelSurface> {
    prop_oneof![
        (0.5..12.0f64).prop_map(|ell| ModelSurface::HyperbolicCylinder { ell }),
        (0.5..12.0f64, -0.5..8.0f64, 0.3..1.0f64).prop_map(|(ell, a, w)| ModelSurface::PerturbedCylinder { ell, a, w }),
    ]
}

/// Greedy pairing; returns the worst distance or infinity when sizes differ.
fn set_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

fn random_matrix(n: usize, entries: &[(f64, f64)]) -> DenseComplexMatrix {
    DenseComplexMatrix::from_fn(n, n, |i, j| {
        let (re, im) = entries[i * n + j];
        Complex64::new(re, im)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_matches_log_derivative_of_hbar(m in model(), t in -0.8..0.9f64) {
        let spec = m.spec().unwrap();
        let g = spec.gamma(t).unwrap();
        let err = |h: f64| {
            let fd = -(spec.hbar(t + h).unwrap().ln() - spec.hbar(t - h).unwrap().ln()) / (2.0 * h);
            (fd - g).abs()
        };
        let (e1, e2, e3) = (err(1e-2), err(5e-3), err(2.5e-3));
        if e1 > 1e-11 * (1.0 + g.abs()) {
            prop_assert!(e2 <= 0.3 * e1, "{e1} {e2}");
            prop_assert!(e3 <= 0.3 * e2 + 1e-12, "{e2} {e3}");
        }
    }

    #[test]
    fn hbar_positive_on_scan(m in model()) {
        let spec = m.spec().unwrap();
        for j in 1..=1000 {
            let t = -1.0 + 2.0 * j as f64 / 1000.0;
            let h = spec.hbar(t).unwrap();
            prop_assert!(h > 0.0 && h.is_finite(), "t = {t}");
        }
    }

    #[test]
    fn zero_amplitude_is_the_cylinder(ell in 0.5..12.0f64, w in 0.1..2.0f64, t in -0.99..1.0f64) {
        let p = ModelSurface::PerturbedCylinder { ell, a: 0.0, w }.spec().unwrap();
        let c = ModelSurface::HyperbolicCylinder { ell }.spec().unwrap();
        prop_assert_eq!(p.hbar(t).unwrap().to_bits(), c.hbar(t).unwrap().to_bits());
        prop_assert_eq!(p.gamma(t).unwrap().to_bits(), c.gamma(t).unwrap().to_bits());
    }

    #[test]
    fn zeta_round_trip(l in complex(-50.0, 50.0)) {
        let back = zeta_to_lambda(lambda_to_zeta(l, 1), 1);
        prop_assert!((back - l).norm() <= 4.0 * f64::EPSILON * (1.0 + l.norm()));
    }

    #[test]
    fn kernel_identity(rho in 0.05..2.0f64) {
        let grid = Grid::chebyshev(0.2, 1.0, 64).unwrap();
        let r = model_kernel_residual(rho, &grid).unwrap();
        prop_assert_eq!(r.symbolic, 0.0);
        prop_assert!(r.discrete <= 1e-8);
    }

    #[test]
    fn delta_identity_is_exact(
        k in 0usize..4,
        re in -6i64..6,
        im in -6i64..6,
        den in 1i64..5,
        g in -4i64..3,
        phi in proptest::collection::vec((-9i64..9, -9i64..9), 7),
    ) {
        let lambda = Exact::new(Rational64::new(re, den), Rational64::new(im, den));
        let phi: Vec<Exact> = phi
            .into_iter()
            .map(|(a, b)| Exact::new(Rational64::from_integer(a), Rational64::from_integer(b)))
            .collect();
        let (lhs, rhs) = delta_identity_pairing(k, lambda, Rational64::from_integer(g), &phi).unwrap();
        prop_assert_eq!(lhs, rhs);
        if im > 0 {
            prop_assert_ne!(leading_coefficient(k, lambda), Exact::new(0.into(), 0.into()));
        }
    }

    #[test]
    fn mellin_recovers_manufactured_sums(
        l in complex(-3.0, 0.4),
        coeffs in proptest::collection::vec((0.2..2.0f64, 0.0..TAU), 6),
    ) {
        let il = Complex64::i() * l;
        prop_assume!(integer_distance(il) >= 0.1);
        let c: Vec<Complex64> = coeffs.iter().map(|&(r, t)| Complex64::from_polar(r, t)).collect();
        let (a, b) = (&c[..3], &c[3..]);
        let xs = sample_points(0.5, 40);
        let us: Vec<Complex64> = xs
            .iter()
            .map(|&x| {
                let pw = (il * x.ln()).exp();
                (0..3).map(|j| (a[j] + b[j] * pw) * x.powi(j as i32)).sum()
            })
            .collect();
        let fit = mellin_fit(&xs, &us, l, 3).unwrap();
        for j in 0..3 {
            prop_assert!((fit.a[j] - a[j]).norm() <= 1e-8 * a[j].norm(), "a[{j}]");
            prop_assert!((fit.b[j] - b[j]).norm() <= 1e-8 * b[j].norm(), "b[{j}]");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pencil_is_affine(m in model(), k in -3i64..4, l in complex(-4.0, 4.0)) {
        let spec = m.spec().unwrap();
        let grid = make_grid(-0.4, 24).unwrap();
        for disc in [Discretization::Collocation, Discretization::Ultraspherical] {
            let p = assemble(&spec, k, &grid, BoundaryClosure::Neumann, disc).unwrap();
            let direct = apply_pencil(&p, l);
            let manual = p.a.add_scaled(l, &p.b);
            prop_assert!(direct.is_finite());
            prop_assert_eq!(direct.add_scaled(Complex64::new(-1.0, 0.0), &manual).max_abs(), 0.0);
        }
    }

    #[test]
    fn qr_similarity_invariance(
        m in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 64),
        s in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 64),
    ) {
        let n = 8;
        let m = random_matrix(n, &m);
        let perturb = random_matrix(n, &s).scale(Complex64::new(0.2, 0.0));
        let s = DenseComplexMatrix::identity(n).add_scaled(Complex64::new(1.0, 0.0), &perturb);
        let lu = resonant::eig::lu::LuDecomposition::new(&s).unwrap();
        let similar = lu.solve_matrix(&m.matmul(&s)).unwrap();
        let e1 = qr_eigenvalues(&m).unwrap();
        let e2 = qr_eigenvalues(&similar).unwrap();
        prop_assert_eq!(e1.values.len(), n);
        prop_assert_eq!(e2.values.len(), n);
        prop_assert!(set_distance(&e1.values, &e2.values) <= 1e-8);
    }

    #[test]
    fn pencil_shift_and_conjugation_invariance(
        a in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 100),
        b in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 100),
        s1 in complex(-0.5, 0.5),
        s2 in complex(-0.5, 0.5),
    ) {
        let n = 10;
        let a = random_matrix(n, &a);
        let b = DenseComplexMatrix::identity(n).add_scaled(Complex64::new(0.3, 0.0), &random_matrix(n, &b));
        let cfg = |sigma| ShiftInvertConfig { keep_radius: 1e6, ..ShiftInvertConfig::with_sigma(sigma) };
        let r1 = pencil_eigs_ab(&a, &b, &cfg(s1)).unwrap();
        let r2 = pencil_eigs_ab(&a, &b, &cfg(s2)).unwrap();
        prop_assume!(r1.values.len() == n && r2.values.len() == n);
        prop_assert!(set_distance(&r1.values, &r2.values) <= 1e-8);
        let rc = pencil_eigs_ab(&a.conj(), &b.conj(), &cfg(s1.conj())).unwrap();
        let back: Vec<Complex64> = rc.values.iter().map(|z| z.conj()).collect();
        prop_assert!(set_distance(&r1.values, &back) <= 1e-8);
    }

    #[test]
    fn ode_continuation_is_deterministic(l in complex(-2.0, 1.0), u0 in complex(-1.0, 1.0)) {
        let spec = ModelSurface::HyperbolicCylinder { ell: TAU }.spec().unwrap();
        let xs = [-0.1, -0.2, -0.35];
        let run = || ode_continue_negative(&spec, 1, l, -0.05, (u0, Complex64::new(0.5, 0.0)), None, &xs).unwrap();
        let (p, q) = (run(), run());
        for (x, y) in p.u.iter().zip(&q.u) {
            prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
            prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn json_round_trip(
        rows in proptest::collection::vec((complex(-1e3, 1e3), -9i64..9, 0.0..1e-6f64, any::<bool>()), 0..12),
    ) {
        let set = ResonanceSet {
            candidates: rows
                .into_iter()
                .map(|(l, k, r, d)| ResonanceCandidate {
                    lambda: l,
                    zeta: lambda_to_zeta(l, 1),
                    mode_k: k,
                    residual: r,
                    match_error: r / 3.0,
                    closure: if d { BoundaryClosure::Dirichlet } else { BoundaryClosure::Neumann },
                    grid_n: 160,
                })
                .collect(),
            window: Window::new(-4.0, 4.0, -3.0, 0.5),
            config: PipelineConfig::default(),
            warnings: vec![],
            problems: 3,
            failed_problems: 1,
        };
        let text = resonant::cli::emit::json(&set).unwrap();
        prop_assert_eq!(serde_json::from_str::<ResonanceSet>(&text).unwrap(), set);
    }
}

fn small_config() -> PipelineConfig {
    PipelineConfig {
        grid_n: 48,
        ..PipelineConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn window_monotonicity(
        re0 in -2.5..0.0f64, re1 in 0.0..2.5f64, im0 in -2.2..-0.6f64,
        grow in 0.1..1.0f64,
    ) {
        let model = ModelSurface::HyperbolicCylinder { ell: TAU };
        let inner = Window::new(re0, re1, im0, 0.5);
        let outer = Window::new(re0 - grow, re1 + grow, im0 - grow, 0.5 + grow);
        let cfg = small_config();
        let a = compute_resonances(&model, ModeRange::new(0, 1), &inner, &cfg).unwrap();
        let b = compute_resonances(&model, ModeRange::new(0, 1), &outer, &cfg).unwrap();
        for c in &a.candidates {
            prop_assert!(
                b.candidates.iter().any(|d| d.mode_k == c.mode_k && (d.lambda - c.lambda).norm() <= 1e-6),
                "{c:?} lost"
            );
        }
    }

    #[test]
    fn modes_k_and_minus_k_agree(k in 1i64..4) {
        let model = ModelSurface::PerturbedCylinder { ell: TAU, a: 0.5, w: 0.5 };
        let window = Window::new(-3.0, 3.0, -2.0, 0.5);
        let cfg = small_config();
        let plus = compute_resonances(&model, ModeRange::new(k, k), &window, &cfg).unwrap();
        let minus = compute_resonances(&model, ModeRange::new(-k, -k), &window, &cfg).unwrap();
        prop_assert!(set_distance(&plus.lambdas(), &minus.lambdas()) <= 1e-12);
    }
}

#[test]
fn cylinder_closures_are_disjoint() {
    let set = compute_resonances(
        &ModelSurface::HyperbolicCylinder { ell: TAU },
        ModeRange::new(0, 3),
        &Window::new(-4.0, 4.0, -3.0, 0.5),
        &PipelineConfig::default(),
    )
    .unwrap();
    for d in set.candidates.iter().filter(|c| c.closure == BoundaryClosure::Dirichlet) {
        for n in set.candidates.iter().filter(|c| c.closure == BoundaryClosure::Neumann && c.mode_k == d.mode_k) {
            assert!((d.lambda - n.lambda).norm() > 1e-6);
        }
    }
}
