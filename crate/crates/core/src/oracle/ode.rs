//! Continuation of a mode solution into the hyperbolic region `x < 0`.
//!
//! Away from `x = 0` the equation `P(lambda) u = F` is the regular ODE
//! `4x u'' = (2 gamma x - 4 + 4 i lambda) u' + (k^2/f^2 + gamma zeta) u - F`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dopri::{integrate, StepPolicy};
use super::OracleError;
use crate::geometry::EvenMetricSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeSolution {
    pub xs: Vec<f64>,
    pub u: Vec<Complex64>,
    pub du: Vec<Complex64>,
}

pub type Forcing<'a> = &'a (dyn Fn(f64) -> Complex64 + Sync);

/// Integrates leftward from `x_start < 0` with data `(u, u')` and returns the
/// solution at `samples` (decreasing, each in `[-1, x_start]`).
pub fn ode_continue_negative(
    spec: &EvenMetricSpec,
    k: i64,
    lambda: Complex64,
    x_start: f64,
    data: (Complex64, Complex64),
    forcing: Option<Forcing<'_>>,
    samples: &[f64],
) -> Result<OdeSolution, OracleError> {
    if !(x_start < 0.0 && x_start >= -1.0) {
        return Err(OracleError::InvalidInput(format!("x_start = {x_start} must lie in [-1, 0)")));
    }
    if samples.windows(2).any(|w| w[1] > w[0]) || samples.iter().any(|&x| x > x_start || x < -1.0) {
        return Err(OracleError::InvalidInput("samples must decrease within [-1, x_start]".into()));
    }
    let i = Complex64::i();
    let zeta = spec.n as f64 / 2.0 - i * lambda;
    let k2 = (k * k) as f64;
    let rhs = |x: f64, y: &[Complex64; 2]| {
        let (g, f) = match (spec.gamma(x), spec.f(x)) {
            (Ok(g), Ok(f)) => (g, f),
            _ => (f64::NAN, f64::NAN),
        };
        let load = forcing.map_or(Complex64::new(0.0, 0.0), |q| q(x));
        let drift = 2.0 * g * x - 4.0 + 4.0 * i * lambda;
        let potential = k2 / (f * f) + g * zeta;
        [y[1], (drift * y[1] + potential * y[0] - load) / (4.0 * x)]
    };
    let states = integrate(rhs, x_start, [data.0, data.1], samples, &StepPolicy::default())
        .map_err(|e| OracleError::StepFailure { x: e.x })?;
    Ok(OdeSolution {
        xs: samples.to_vec(),
        u: states.iter().map(|s| s[0]).collect(),
        du: states.iter().map(|s| s[1]).collect(),
    })
}
