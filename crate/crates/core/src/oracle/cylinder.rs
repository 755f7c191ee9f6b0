//! Exact resonances of the hyperbolic cylinder `dr^2 + (ell/2pi)^2 cosh^2 r dtheta^2`.
//!
//! With `u = v / sqrt(cosh r)` the mode-`k` equation becomes the Pöschl–Teller
//! problem `-v'' + (nu^2 + 1/4) sech^2 r v = lambda^2 v`, `nu = 2 pi k / ell`.
//! Its incoming coefficient is a Gamma quotient in
//! `a = (1/2 + i nu + i lambda)/2`, `b = (1/2 + i nu - i lambda)/2`:
//!
//! ```text
//! Neumann:   c_in = 2^(i lambda) Gamma(1/2) Gamma(-i lambda) / (Gamma(b) Gamma(1/2 - a))
//! Dirichlet: c_in = 2^(i lambda) Gamma(3/2) Gamma(-i lambda) / (Gamma(b + 1/2) Gamma(1 - a))
//! ```
//!
//! Resonances are the zeros of the entire denominators
//! `E_N = 1/(Gamma(b) Gamma(1/2 - a))` and `E_D = 1/(Gamma(b + 1/2) Gamma(1 - a))`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dopri::{integrate, StepPolicy};
use super::gamma::{digamma, ln_gamma};
use super::OracleError;
use crate::geometry::BoundaryClosure;
use crate::resonance::Window;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactResonance {
    pub lambda: Complex64,
    pub closure: BoundaryClosure,
    pub multiplicity: usize,
}

fn params(nu: f64, lambda: Complex64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let a = (0.5 + i * nu + i * lambda) / 2.0;
    let b = (0.5 + i * nu - i * lambda) / 2.0;
    (a, b)
}

/// Gamma arguments of the denominator for `closure`.
fn arguments(closure: BoundaryClosure, nu: f64, lambda: Complex64) -> [Complex64; 2] {
    let (a, b) = params(nu, lambda);
    match closure {
        BoundaryClosure::Neumann => [b, 0.5 - a],
        BoundaryClosure::Dirichlet => [b + 0.5, 1.0 - a],
    }
}

/// A branch of `ln E`; only its imaginary part modulo `2 pi` is used.
fn ln_quotient(closure: BoundaryClosure, nu: f64, lambda: Complex64) -> Complex64 {
    let [p, q] = arguments(closure, nu, lambda);
    -ln_gamma(p) - ln_gamma(q)
}

/// `E'/E`.
fn log_derivative(closure: BoundaryClosure, nu: f64, lambda: Complex64) -> Complex64 {
    let [p, q] = arguments(closure, nu, lambda);
    0.5 * Complex64::i() * (digamma(p) + digamma(q))
}

/// Incoming connection coefficient from the closed form.
pub fn connection_coefficient(closure: BoundaryClosure, nu: f64, lambda: Complex64) -> Complex64 {
    let i = Complex64::i();
    let prefactor = match closure {
        BoundaryClosure::Neumann => PI.sqrt(),
        BoundaryClosure::Dirichlet => PI.sqrt() / 2.0,
    };
    let ln2 = 2f64.ln();
    (i * lambda * ln2 + ln_gamma(-i * lambda) + ln_quotient(closure, nu, lambda)).exp() * prefactor
}

/// Incoming coefficient by integrating the Pöschl–Teller equation from the neck.
pub fn connection_coefficient_numeric(
    closure: BoundaryClosure,
    nu: f64,
    lambda: Complex64,
    r_max: f64,
) -> Result<Complex64, OracleError> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let y0 = match closure {
        BoundaryClosure::Neumann => [one, zero],
        BoundaryClosure::Dirichlet => [zero, one],
    };
    let strength = nu * nu + 0.25;
    let l2 = lambda * lambda;
    let out = integrate(
        |r, y: &[Complex64; 2]| {
            let sech = 1.0 / r.cosh();
            [y[1], (strength * sech * sech - l2) * y[0]]
        },
        0.0,
        y0,
        &[r_max],
        &StepPolicy::default(),
    )
    .map_err(|f| OracleError::StepFailure { x: f.x })?;
    let [v, dv] = out[0];
    let il = Complex64::i() * lambda;
    Ok((il * r_max).exp() * (v - dv / il) / 2.0)
}

/// Compares closed form and direct integration at three points of the upper half plane.
pub fn self_check(nu: f64) -> Result<f64, OracleError> {
    let samples = [Complex64::new(0.3, 0.7), Complex64::new(-1.1, 0.5), Complex64::new(0.6, 1.2)];
    let mut worst: f64 = 0.0;
    for closure in BoundaryClosure::ALL {
        for &lambda in &samples {
            let exact = connection_coefficient(closure, nu, lambda);
            let numeric = connection_coefficient_numeric(closure, nu, lambda, 18.0)?;
            worst = worst.max((exact - numeric).norm() / exact.norm());
        }
    }
    if worst > 1e-7 {
        return Err(OracleError::SelfCheckFailed { relative_error: worst });
    }
    Ok(worst)
}

/// Tracks the total change of `arg E` along the segment `z0 -> z1`.
fn arg_change(closure: BoundaryClosure, nu: f64, z0: Complex64, z1: Complex64) -> Option<f64> {
    let pieces = 24;
    let mut total = 0.0;
    let mut stack: Vec<(Complex64, Complex64, Complex64, Complex64, u32)> = Vec::new();
    let mut za = z0;
    let mut la = ln_quotient(closure, nu, za);
    for p in 1..=pieces {
        let zb = z0 + (z1 - z0) * (p as f64 / pieces as f64);
        let lb = ln_quotient(closure, nu, zb);
        stack.push((za, la, zb, lb, 0));
        while let Some((a, fa, b, fb, depth)) = stack.pop() {
            if !(fa.im.is_finite() && fb.im.is_finite()) {
                return None;
            }
            let d = wrap(fb.im - fa.im);
            if d.abs() > 0.3 && depth < 40 {
                let m = (a + b) / 2.0;
                let fm = ln_quotient(closure, nu, m);
                stack.push((m, fm, b, fb, depth + 1));
                stack.push((a, fa, m, fm, depth + 1));
            } else {
                total += d;
            }
        }
        za = zb;
        la = lb;
    }
    Some(total)
}

fn wrap(d: f64) -> f64 {
    let t = d.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// Number of zeros of `E` inside the rectangle.
fn count_zeros(closure: BoundaryClosure, nu: f64, w: &Window) -> Option<usize> {
    let c = [
        Complex64::new(w.re_min, w.im_min),
        Complex64::new(w.re_max, w.im_min),
        Complex64::new(w.re_max, w.im_max),
        Complex64::new(w.re_min, w.im_max),
    ];
    let mut total = 0.0;
    for e in 0..4 {
        total += arg_change(closure, nu, c[e], c[(e + 1) % 4])?;
    }
    let n = total / (2.0 * PI);
    if (n - n.round()).abs() > 0.1 || n.round() < 0.0 {
        return None;
    }
    Some(n.round() as usize)
}

fn newton(closure: BoundaryClosure, nu: f64, start: Complex64, multiplicity: usize) -> Option<Complex64> {
    let mut z = start;
    for _ in 0..100 {
        let step = multiplicity as f64 / log_derivative(closure, nu, z);
        if !(step.re.is_finite() && step.im.is_finite()) {
            return Some(z);
        }
        z -= step;
        if step.norm() <= 1e-15 * (1.0 + z.norm()) {
            return Some(z);
        }
    }
    None
}

const SPLIT: f64 = 0.4817;

fn find_in_cell(
    closure: BoundaryClosure,
    nu: f64,
    w: Window,
    count: usize,
    depth: u32,
    out: &mut Vec<ExactResonance>,
) -> Result<(), OracleError> {
    if count == 0 {
        return Ok(());
    }
    let size = (w.re_max - w.re_min).max(w.im_max - w.im_min);
    if count == 1 || size < 1e-3 {
        let center = Complex64::new((w.re_min + w.re_max) / 2.0, (w.im_min + w.im_max) / 2.0);
        if let Some(z) = newton(closure, nu, center, count) {
            if w.expanded(1e-9).contains(z) {
                out.push(ExactResonance {
                    lambda: z,
                    closure,
                    multiplicity: count,
                });
                return Ok(());
            }
        }
        if size < 1e-3 || depth > 60 {
            return Err(OracleError::RootFindingFailed { near: center });
        }
    }
    let xs = w.re_min + SPLIT * (w.re_max - w.re_min);
    let ys = w.im_min + SPLIT * (w.im_max - w.im_min);
    let cells = [
        Window::new(w.re_min, xs, w.im_min, ys),
        Window::new(xs, w.re_max, w.im_min, ys),
        Window::new(w.re_min, xs, ys, w.im_max),
        Window::new(xs, w.re_max, ys, w.im_max),
    ];
    let mut seen = 0;
    for cell in cells {
        let c = count_zeros(closure, nu, &cell).ok_or(OracleError::RootFindingFailed {
            near: Complex64::new(xs, ys),
        })?;
        seen += c;
        find_in_cell(closure, nu, cell, c, depth + 1, out)?;
    }
    if seen != count {
        return Err(OracleError::RootFindingFailed {
            near: Complex64::new(xs, ys),
        });
    }
    Ok(())
}

/// Resonances of mode `k` for one closure inside `window` (edges inclusive).
pub fn closure_resonances(
    ell: f64,
    k: i64,
    closure: BoundaryClosure,
    window: &Window,
) -> Result<Vec<ExactResonance>, OracleError> {
    let nu = 2.0 * PI * k as f64 / ell;
    // Offset the contour so that no zero sits on it.
    let search = Window::new(
        window.re_min - 0.0131,
        window.re_max + 0.0173,
        window.im_min - 0.0119,
        window.im_max + 0.0157,
    );
    let count = count_zeros(closure, nu, &search).ok_or(OracleError::RootFindingFailed {
        near: Complex64::new(search.re_min, search.im_min),
    })?;
    let mut out = Vec::new();
    find_in_cell(closure, nu, search, count, 0, &mut out)?;
    out.retain(|r| window.expanded(1e-9).contains(r.lambda));
    out.sort_by(|a, b| a.lambda.re.total_cmp(&b.lambda.re).then(a.lambda.im.total_cmp(&b.lambda.im)));
    Ok(out)
}

/// Resonances of mode `k` on the full cylinder: the union of both closures.
pub fn cylinder_resonances_exact(ell: f64, k: i64, window: &Window) -> Result<Vec<ExactResonance>, OracleError> {
    if !(ell > 0.0 && ell.is_finite()) {
        return Err(OracleError::InvalidInput(format!("ell = {ell} must be positive")));
    }
    window
        .validate()
        .map_err(|e| OracleError::InvalidInput(e.to_string()))?;
    self_check(2.0 * PI * k as f64 / ell)?;
    let mut all = Vec::new();
    for closure in BoundaryClosure::ALL {
        all.extend(closure_resonances(ell, k, closure, window)?);
    }
    Ok(all)
}
