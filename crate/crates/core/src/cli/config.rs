//! JSON run configuration.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::assembly::Discretization;
use crate::chebyshev::MIN_GRID_NODES;
use crate::geometry::{BoundaryClosure, ModelSurface};
use crate::resonance::{ModeRange, PipelineConfig, Shifts, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Csv,
    Json,
    Svg,
}

/// `"auto"` or a list of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ShiftSpec {
    Keyword(String),
    List(Vec<Complex64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSurface,
    pub modes: ModeRange,
    /// `[re_min, re_max, im_min, im_max]` in the `lambda` plane.
    pub window: [f64; 4],
    #[serde(rename = "grid_N")]
    pub grid_n: usize,
    pub x_min: f64,
    pub closures: Vec<BoundaryClosure>,
    pub shifts: ShiftSpec,
    pub residual_tol: f64,
    pub match_tol: f64,
    pub output: PathBuf,
    pub emit: Vec<Emit>,
    #[serde(default)]
    pub discretization: Option<Discretization>,
    #[serde(default)]
    pub keep_radius: Option<f64>,
    #[serde(default)]
    pub cluster_tol: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            if path == "." {
                CliError::Config(e.into_inner().to_string())
            } else {
                CliError::Config(format!("field `{path}`: {}", e.into_inner()))
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn window(&self) -> Window {
        let [a, b, c, d] = self.window;
        Window::new(a, b, c, d)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let field = |name: &str, msg: String| Err(CliError::Config(format!("field `{name}`: {msg}")));
        if let Err(e) = self.model.validate() {
            return field("model", e.to_string());
        }
        if self.window.iter().any(|v| !v.is_finite()) {
            return field("window", "entries must be finite".into());
        }
        let [re_min, re_max, im_min, im_max] = self.window;
        if re_min > re_max || im_min > im_max {
            return field("window", format!("{:?} is inverted", self.window));
        }
        if self.modes.min > self.modes.max {
            return field("modes", format!("min {} exceeds max {}", self.modes.min, self.modes.max));
        }
        if self.grid_n < MIN_GRID_NODES {
            return field("grid_N", format!("{} is below {MIN_GRID_NODES}", self.grid_n));
        }
        if !(self.x_min >= -1.0 && self.x_min < 0.0) {
            return field("x_min", format!("{} is outside [-1, 0)", self.x_min));
        }
        for (name, v) in [("residual_tol", self.residual_tol), ("match_tol", self.match_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return field(name, format!("{v} must be positive"));
            }
        }
        for (name, v) in [("keep_radius", self.keep_radius), ("cluster_tol", self.cluster_tol)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return field(name, format!("{v} must be positive"));
                }
            }
        }
        if self.closures.is_empty() {
            return field("closures", "must name at least one closure".into());
        }
        match &self.shifts {
            ShiftSpec::Keyword(k) if k != "auto" => return field("shifts", format!("expected \"auto\", got {k:?}")),
            ShiftSpec::List(s) if s.is_empty() => return field("shifts", "list is empty".into()),
            ShiftSpec::List(s) if s.iter().any(|z| !z.is_finite()) => {
                return field("shifts", "entries must be finite".into())
            }
            _ => {}
        }
        if self.output.as_os_str().is_empty() {
            return field("output", "empty path prefix".into());
        }
        Ok(())
    }

    pub fn pipeline(&self) -> PipelineConfig {
        let base = PipelineConfig::default();
        let mut closures = self.closures.clone();
        closures.sort();
        closures.dedup();
        PipelineConfig {
            grid_n: self.grid_n,
            x_min: self.x_min,
            closures,
            shifts: match &self.shifts {
                ShiftSpec::Keyword(_) => Shifts::Auto,
                ShiftSpec::List(s) => Shifts::Explicit(s.clone()),
            },
            residual_tol: self.residual_tol,
            match_tol: self.match_tol,
            keep_radius: self.keep_radius.unwrap_or(base.keep_radius),
            cluster_tol: self.cluster_tol.unwrap_or(base.cluster_tol),
            discretization: self.discretization.unwrap_or(base.discretization),
            ..base
        }
    }

    pub fn emits(&self, e: Emit) -> bool {
        self.emit.contains(&e)
    }

    /// `<output><suffix>`, e.g. `run` + `.csv`.
    pub fn output_path(&self, suffix: &str) -> PathBuf {
        let mut s = self.output.clone().into_os_string();
        s.push(suffix);
        PathBuf::from(s)
    }
}
