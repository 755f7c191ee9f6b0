//! Even asymptotically hyperbolic surface models.
//!
//! Near infinity the metric is `(dy^2 + f(y^2)^2 dtheta^2) / y^2`; everything
//! downstream is expressed in `t = x = y^2` through the warp profile `f(t)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eig::{lstsq, DenseComplexMatrix};
use num_complex::Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("t = {t} lies outside [-1, 1]")]
    OutOfDomain { t: f64 },
    #[error("profile of {name} is degenerate at t = {t} (f = {f})")]
    Degenerate { name: String, t: f64, f: f64 },
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
    #[error("evenness fit needs at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },
}

pub type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Warped boundary metric `h(t) = f(t)^2 dtheta^2` with analytic `f'`.
#[derive(Clone)]
pub struct EvenMetricSpec {
    pub name: String,
    /// Boundary dimension; the implementation handles `n = 1`.
    pub n: u32,
    pub profile_f: ProfileFn,
    pub profile_f_deriv: ProfileFn,
}

impl fmt::Debug for EvenMetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EvenMetricSpec")
            .field("name", &self.name)
            .field("n", &self.n)
            .finish_non_exhaustive()
    }
}

impl EvenMetricSpec {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            n: 1,
            profile_f: Arc::new(f),
            profile_f_deriv: Arc::new(df),
        }
    }

    fn checked_f(&self, t: f64) -> Result<f64, GeometryError> {
        if !(-1.0..=1.0).contains(&t) {
            return Err(GeometryError::OutOfDomain { t });
        }
        let f = (self.profile_f)(t);
        if !(f > 0.0 && f.is_finite()) {
            return Err(GeometryError::Degenerate {
                name: self.name.clone(),
                t,
                f,
            });
        }
        Ok(f)
    }

    pub fn f(&self, t: f64) -> Result<f64, GeometryError> {
        self.checked_f(t)
    }

    /// `hbar(t) = det h(t) = f(t)^2`.
    pub fn hbar(&self, t: f64) -> Result<f64, GeometryError> {
        let f = self.checked_f(t)?;
        Ok(f * f)
    }

    /// `gamma(t) = -hbar'(t) / hbar(t) = -2 f'(t) / f(t)`.
    pub fn gamma(&self, t: f64) -> Result<f64, GeometryError> {
        let f = self.checked_f(t)?;
        Ok(-2.0 * (self.profile_f_deriv)(t) / f)
    }

    /// Zero-order potential of Fourier mode `k`, `k^2 / f(t)^2`.
    pub fn mode_potential(&self, k: i64, t: f64) -> Result<f64, GeometryError> {
        let f = self.checked_f(t)?;
        let k = k as f64;
        Ok(k * k / (f * f))
    }
}

/// Catalog of surfaces understood by the pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ModelSurface {
    /// `dr^2 + (ell / 2 pi)^2 cosh^2 r dtheta^2`.
    HyperbolicCylinder { ell: f64 },
    /// Cylinder warp multiplied by `1 + a exp(-((1 - t) / w)^2)`.
    PerturbedCylinder { ell: f64, a: f64, w: f64 },
    #[serde(skip)]
    Custom(EvenMetricSpec),
}

impl PartialEq for ModelSurface {
    fn eq(&self, other: &Self) -> bool {
        use ModelSurface::*;
        match (self, other) {
            (HyperbolicCylinder { ell: a }, HyperbolicCylinder { ell: b }) => a == b,
            (
                PerturbedCylinder { ell, a, w },
                PerturbedCylinder {
                    ell: ell2,
                    a: a2,
                    w: w2,
                },
            ) => ell == ell2 && a == a2 && w == w2,
            (Custom(x), Custom(y)) => Arc::ptr_eq(&x.profile_f, &y.profile_f),
            _ => false,
        }
    }
}

impl ModelSurface {
    pub fn validate(&self) -> Result<(), GeometryError> {
        match *self {
            ModelSurface::HyperbolicCylinder { ell } => check_ell(ell),
            ModelSurface::PerturbedCylinder { ell, a, w } => {
                check_ell(ell)?;
                if !a.is_finite() {
                    return Err(GeometryError::InvalidParameter(format!("a = {a}")));
                }
                if !(w > 0.0 && w.is_finite()) {
                    return Err(GeometryError::InvalidParameter(format!("w = {w} must be positive")));
                }
                if a <= -1.0 {
                    return Err(GeometryError::InvalidParameter(format!(
                        "a = {a} makes the warp vanish at the neck"
                    )));
                }
                Ok(())
            }
            ModelSurface::Custom(_) => Ok(()),
        }
    }

    pub fn spec(&self) -> Result<EvenMetricSpec, GeometryError> {
        self.validate()?;
        Ok(match self {
            &ModelSurface::HyperbolicCylinder { ell } => {
                let c = ell / (2.0 * PI);
                EvenMetricSpec::new(
                    format!("hyperbolic-cylinder(ell={ell})"),
                    move |t| c * (1.0 + t) / 2.0,
                    move |_| c / 2.0,
                )
            }
            &ModelSurface::PerturbedCylinder { ell, a, w } => {
                let c = ell / (2.0 * PI);
                let bump = move |t: f64| (-((1.0 - t) / w).powi(2)).exp();
                EvenMetricSpec::new(
                    format!("perturbed-cylinder(ell={ell},a={a},w={w})"),
                    move |t| c * (1.0 + t) / 2.0 * (1.0 + a * bump(t)),
                    move |t| {
                        let m = 1.0 + a * bump(t);
                        let dm = a * bump(t) * 2.0 * (1.0 - t) / (w * w);
                        c / 2.0 * m + c * (1.0 + t) / 2.0 * dm
                    },
                )
            }
            ModelSurface::Custom(spec) => spec.clone(),
        })
    }

    /// Neck circumference parameter, when the model has one.
    pub fn ell(&self) -> Option<f64> {
        match *self {
            ModelSurface::HyperbolicCylinder { ell } | ModelSurface::PerturbedCylinder { ell, .. } => Some(ell),
            ModelSurface::Custom(_) => None,
        }
    }

    /// Warp as a function of the distance `r >= 0` from the neck, with
    /// `t = exp(-2r)`.
    pub fn warp_in_r(&self, r: f64) -> Result<f64, GeometryError> {
        let spec = self.spec()?;
        let y = (-r).exp();
        Ok(spec.f(y * y)? / y)
    }

    pub fn is_cylinder(&self) -> bool {
        matches!(self, ModelSurface::HyperbolicCylinder { .. })
    }
}

fn check_ell(ell: f64) -> Result<(), GeometryError> {
    if ell > 0.0 && ell.is_finite() {
        Ok(())
    } else {
        Err(GeometryError::InvalidParameter(format!("ell = {ell} must be positive")))
    }
}

/// Condition imposed at the neck `x = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundaryClosure {
    Dirichlet,
    Neumann,
}

impl BoundaryClosure {
    pub const ALL: [BoundaryClosure; 2] = [BoundaryClosure::Dirichlet, BoundaryClosure::Neumann];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryClosure::Dirichlet => "Dirichlet",
            BoundaryClosure::Neumann => "Neumann",
        }
    }
}

impl fmt::Display for BoundaryClosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvennessReport {
    /// Largest odd-part magnitude on the samples, relative to the data.
    pub odd_part: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub const MIN_EVENNESS_SAMPLES: usize = 8;

/// Splits `y^2 g_thetatheta(y)` into even and odd polynomial parts in `y`.
///
/// `samples` holds `(y, g_thetatheta(y))` with `y` in `(0, 1]`.
pub fn validate_evenness(samples: &[(f64, f64)], tolerance: f64) -> Result<EvennessReport, GeometryError> {
    if samples.len() < MIN_EVENNESS_SAMPLES {
        return Err(GeometryError::TooFewSamples {
            got: samples.len(),
            min: MIN_EVENNESS_SAMPLES,
        });
    }
    if let Some(&(y, _)) = samples.iter().find(|(y, _)| !(*y > 0.0 && *y <= 1.0)) {
        return Err(GeometryError::OutOfDomain { t: y });
    }
    let degree = (samples.len() - 1).min(8);
    let data: Vec<f64> = samples.iter().map(|&(y, g)| y * y * g).collect();
    let scale = data.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let basis = DenseComplexMatrix::from_fn(samples.len(), degree + 1, |i, j| {
        Complex64::new(samples[i].0.powi(j as i32), 0.0)
    });
    let rhs: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v / scale, 0.0)).collect();
    let fit = lstsq(&basis, &rhs).map_err(|_| GeometryError::TooFewSamples {
        got: samples.len(),
        min: MIN_EVENNESS_SAMPLES,
    })?;
    let odd_part = samples
        .iter()
        .map(|&(y, _)| {
            (1..=degree)
                .step_by(2)
                .map(|j| fit.x[j].re * y.powi(j as i32))
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max);
    // Roundoff-level odd parts are reported as exactly zero.
    let odd_part = if odd_part <= 1.0e-12 { 0.0 } else { odd_part };
    Ok(EvennessReport {
        odd_part,
        tolerance,
        pass: odd_part <= tolerance,
    })
}
