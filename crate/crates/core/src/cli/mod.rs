//! Command-line front end: `resonances`, `verify` and `sweep`.

pub mod config;
pub mod emit;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::geometry::ModelSurface;
use crate::oracle::suite::{run_suite, SUITES};
use crate::oracle::{OracleError, OracleReport};
use crate::resonance::{compute_resonances, ResonanceError, ResonanceSet};
use config::{Emit, RunConfig};
use emit::SweepStep;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<ResonanceError> for CliError {
    fn from(e: ResonanceError) -> Self {
        match e {
            ResonanceError::InvalidWindow(_) | ResonanceError::InvalidConfig(_) | ResonanceError::Geometry(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "resonant", version, about = "Scattering resonances of even asymptotically hyperbolic surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    Ell,
    A,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute resonances for a JSON run configuration.
    Resonances { config: PathBuf },
    /// Run an oracle suite and print a pass/fail table.
    Verify { suite: String },
    /// Rerun the pipeline over a range of a model parameter.
    Sweep {
        param: SweepParam,
        #[arg(allow_negative_numbers = true)]
        from: f64,
        #[arg(allow_negative_numbers = true)]
        to: f64,
        steps: usize,
        config: PathBuf,
    },
}

/// Dispatches a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Resonances { config } => cmd_resonances(&config),
        Command::Verify { suite } => cmd_verify(&suite, &mut std::io::stdout()),
        Command::Sweep {
            param,
            from,
            to,
            steps,
            config,
        } => cmd_sweep(param, from, to, steps, &config),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn write_output(path: &Path, contents: &str) -> Result<(), CliError> {
    emit::write_atomic(path, contents)
        .map_err(|e| CliError::Config(format!("field `output`: cannot write {}: {e}", path.display())))
}

fn dimension(model: &ModelSurface) -> Result<u32, CliError> {
    Ok(model.spec().map_err(|e| CliError::Config(format!("field `model`: {e}")))?.n)
}

/// Runs the pipeline for one configuration; total failure is a numerical error.
fn run_pipeline(cfg: &RunConfig) -> Result<ResonanceSet, CliError> {
    let set = compute_resonances(&cfg.model, cfg.modes, &cfg.window(), &cfg.pipeline())?;
    if set.problems > 0 && set.failed_problems == set.problems {
        let detail = set.warnings.first().cloned().unwrap_or_default();
        return Err(CliError::Numerical(format!("every mode failed: {detail}")));
    }
    Ok(set)
}

pub fn cmd_resonances(path: &Path) -> Result<i32, CliError> {
    let cfg = RunConfig::load(path)?;
    let set = run_pipeline(&cfg)?;
    for w in &set.warnings {
        log::warn!("{w}");
    }
    if cfg.emits(Emit::Csv) {
        write_output(&cfg.output_path(".csv"), &emit::csv(&set))?;
    }
    if cfg.emits(Emit::Json) {
        let text = emit::json(&set).map_err(|e| CliError::Numerical(e.to_string()))?;
        write_output(&cfg.output_path(".json"), &text)?;
    }
    if cfg.emits(Emit::Svg) {
        write_output(&cfg.output_path(".svg"), &emit::svg(&set, dimension(&cfg.model)?))?;
    }
    log::info!("{} candidates", set.candidates.len());
    Ok(EXIT_OK)
}

/// Fixed-width table with columns `CHECK  MEASURED  TOL  PASS`.
pub fn format_table(reports: &[OracleReport]) -> String {
    let names: Vec<String> = reports.iter().map(|r| format!("{:?}: {}", r.kind, r.detail)).collect();
    let width = names.iter().map(String::len).max().unwrap_or(5).max(5);
    let mut out = format!("{:<width$}  {:>10}  {:>8}  PASS\n", "CHECK", "MEASURED", "TOL");
    for (name, r) in names.iter().zip(reports) {
        out.push_str(&format!(
            "{name:<width$}  {:>10.3e}  {:>8.1e}  {}\n",
            r.measured,
            r.tolerance,
            if r.pass { "PASS" } else { "FAIL" }
        ));
    }
    out
}

pub fn cmd_verify(suite: &str, out: &mut dyn std::io::Write) -> Result<i32, CliError> {
    if !SUITES.contains(&suite) {
        return Err(CliError::Config(format!(
            "unknown suite {suite:?}; expected one of {}",
            SUITES.join(", ")
        )));
    }
    let reports = run_suite(suite).map_err(|e| match e {
        OracleError::UnknownSuite(s) => CliError::Config(format!("unknown suite {s:?}")),
        other => CliError::Numerical(other.to_string()),
    })?;
    write!(out, "{}", format_table(&reports)).map_err(|e| CliError::Numerical(e.to_string()))?;
    Ok(if reports.iter().all(|r| r.pass) { EXIT_OK } else { 1 })
}

/// Parameter values `from + (to - from) i / (steps - 1)`.
pub fn sweep_values(from: f64, to: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
        .collect()
}

fn with_param(model: &ModelSurface, param: SweepParam, value: f64) -> Result<ModelSurface, CliError> {
    match (param, model) {
        (SweepParam::Ell, ModelSurface::HyperbolicCylinder { .. }) => Ok(ModelSurface::HyperbolicCylinder { ell: value }),
        (SweepParam::Ell, &ModelSurface::PerturbedCylinder { a, w, .. }) => {
            Ok(ModelSurface::PerturbedCylinder { ell: value, a, w })
        }
        (SweepParam::A, &ModelSurface::PerturbedCylinder { ell, w, .. }) => {
            Ok(ModelSurface::PerturbedCylinder { ell, a: value, w })
        }
        (SweepParam::A, _) => Err(CliError::Config(
            "field `model`: sweeping `a` requires a PerturbedCylinder model".into(),
        )),
        (_, ModelSurface::Custom(_)) => Err(CliError::Config("field `model`: custom models cannot be swept".into())),
    }
}

/// Runs every step of a sweep; failures are recorded, not propagated.
pub fn sweep(cfg: &RunConfig, param: SweepParam, values: &[f64]) -> Result<Vec<SweepStep>, CliError> {
    let mut steps = Vec::with_capacity(values.len());
    for &v in values {
        let mut step_cfg = cfg.clone();
        step_cfg.model = with_param(&cfg.model, param, v)?;
        let outcome = step_cfg
            .model
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))
            .and_then(|_| run_pipeline(&step_cfg));
        steps.push(match outcome {
            Ok(set) => SweepStep {
                param_value: v,
                status: "ok".into(),
                set: Some(set),
            },
            Err(e) => {
                log::warn!("step {v}: {e}");
                SweepStep {
                    param_value: v,
                    status: match e {
                        CliError::Config(_) => "invalid".into(),
                        CliError::Numerical(_) => "failed".into(),
                    },
                    set: None,
                }
            }
        });
    }
    Ok(steps)
}

pub fn cmd_sweep(param: SweepParam, from: f64, to: f64, steps: usize, path: &Path) -> Result<i32, CliError> {
    if steps < 2 {
        return Err(CliError::Config(format!("steps = {steps} must be at least 2")));
    }
    if !(from.is_finite() && to.is_finite()) {
        return Err(CliError::Config("sweep range must be finite".into()));
    }
    let cfg = RunConfig::load(path)?;
    let n = dimension(&cfg.model)?;
    let results = sweep(&cfg, param, &sweep_values(from, to, steps))?;
    if cfg.emits(Emit::Csv) {
        write_output(&cfg.output_path(".sweep.csv"), &emit::sweep_csv(&results))?;
    }
    if cfg.emits(Emit::Json) {
        let text = emit::json(&results).map_err(|e| CliError::Numerical(e.to_string()))?;
        write_output(&cfg.output_path(".sweep.json"), &text)?;
    }
    if cfg.emits(Emit::Svg) {
        write_output(&cfg.output_path(".sweep.svg"), &emit::sweep_svg(&results, n, 1.0))?;
    }
    if results.iter().all(|s| s.set.is_none()) {
        return Err(CliError::Numerical("every sweep step failed".into()));
    }
    Ok(EXIT_OK)
}

/// Worker count from `VASY_THREADS`, if set.
pub fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var("VASY_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("VASY_THREADS = {v:?} must be a positive integer"))),
        },
    }
}
