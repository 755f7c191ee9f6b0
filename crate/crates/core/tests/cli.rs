use std::path::Path;
use std::process::{Command, Output};

use resonant::cli::emit::CSV_HEADER;
use resonant::oracle::cylinder::cylinder_resonances_exact;
use resonant::resonance::{ResonanceSet, Window};
use serde_json::{json, Value};

fn base_config(dir: &Path) -> Value {
    json!({
        "model": {"kind": "HyperbolicCylinder", "ell": std::f64::consts::TAU},
        "modes": {"min": 0, "max": 2},
        "window": [-4, 4, -3, 0.5],
        "grid_N": 80,
        "x_min": -0.4,
        "closures": ["Dirichlet", "Neumann"],
        "shifts": "auto",
        "residual_tol": 1e-8,
        "match_tol": 1e-6,
        "output": dir.join("out/run").to_str().unwrap(),
        "emit": ["csv", "json", "svg"]
    })
}

fn write_config(dir: &Path, cfg: &Value) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    path
}

fn resonant(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resonant"))
        .args(args)
        .env("VASY_THREADS", "1")
        .output()
        .unwrap()
}

#[test]
fn cylinder_run_matches_exact_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &base_config(dir.path()));
    let out = resonant(&["resonances", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = std::fs::read_to_string(dir.path().join("out/run.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
    let json = std::fs::read_to_string(dir.path().join("out/run.json")).unwrap();
    let set: ResonanceSet = serde_json::from_str(&json).unwrap();
    assert_eq!(csv.lines().count(), set.candidates.len() + 1);
    assert_eq!(serde_json::to_string_pretty(&set).unwrap() + "\n", json);

    let window = Window::new(-4.0, 4.0, -3.0, 0.5);
    for c in &set.candidates {
        let exact = cylinder_resonances_exact(std::f64::consts::TAU, c.mode_k, &window).unwrap();
        let best = exact
            .iter()
            .filter(|e| e.closure == c.closure)
            .map(|e| (e.lambda - c.lambda).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(best <= 1e-6, "{c:?}");
    }
    let svg = std::fs::read_to_string(dir.path().join("out/run.svg")).unwrap();
    assert!(svg.contains("continuous-spectrum"));
}

#[test]
fn emission_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = base_config(dir.path());
    cfg["modes"] = json!({"min": 1, "max": 1});
    let path = write_config(dir.path(), &cfg);
    let mut outputs = Vec::new();
    for _ in 0..2 {
        assert_eq!(resonant(&["resonances", path.to_str().unwrap()]).status.code(), Some(0));
        outputs.push(
            ["csv", "json", "svg"].map(|e| std::fs::read(dir.path().join(format!("out/run.{e}"))).unwrap()),
        );
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn empty_window_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = base_config(dir.path());
    cfg["window"] = json!([-4, 4, 0.2, 0.2]);
    cfg["emit"] = json!(["csv"]);
    let out = resonant(&["resonances", write_config(dir.path(), &cfg).to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("out/run.csv")).unwrap();
    assert_eq!(csv, format!("{CSV_HEADER}\n"));
    assert!(!dir.path().join("out/run.json").exists());
}

#[test]
fn config_errors_exit_2_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let missing = resonant(&["resonances", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));

    let malformed = dir.path().join("bad.json");
    std::fs::write(&malformed, "{\"model\": ").unwrap();
    assert_eq!(resonant(&["resonances", malformed.to_str().unwrap()]).status.code(), Some(2));

    for (field, value) in [("x_min", json!(0.3)), ("grid_N", json!(4)), ("residual_tol", json!(-1.0))] {
        let mut cfg = base_config(dir.path());
        cfg[field] = value;
        let out = resonant(&["resonances", write_config(dir.path(), &cfg).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&out.stderr).contains(field));
    }
}

#[test]
fn degenerate_model_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = base_config(dir.path());
    cfg["model"] = json!({"kind": "HyperbolicCylinder", "ell": 1e-200});
    cfg["modes"] = json!({"min": 1, "max": 1});
    let out = resonant(&["resonances", write_config(dir.path(), &cfg).to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn singular_shift_is_retried_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = base_config(dir.path());
    cfg["shifts"] = json!([[0.0, -0.5]]);
    cfg["modes"] = json!({"min": 0, "max": 0});
    let out = resonant(&["resonances", write_config(dir.path(), &cfg).to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let set: ResonanceSet =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/run.json")).unwrap()).unwrap();
    assert!(set.warnings.iter().any(|w| w.contains("retried")));
    assert!(set.candidates.iter().any(|c| (c.lambda.im + 0.5).abs() < 1e-6));
}

#[test]
fn verify_suites() {
    let out = resonant(&["verify", "delta"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap().split_whitespace().collect::<Vec<_>>(), ["CHECK", "MEASURED", "TOL", "PASS"]);
    assert_eq!(text.lines().skip(1).filter(|l| l.ends_with("PASS")).count(), 27);
    assert_eq!(resonant(&["verify", "kernel"]).status.code(), Some(0));
    assert_eq!(resonant(&["verify", "nonsense"]).status.code(), Some(2));
}

#[test]
fn ell_sweep_accounting() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = base_config(dir.path());
    cfg["modes"] = json!({"min": 0, "max": 1});
    cfg["window"] = json!([-1.5, 1.5, -1.5, 0.5]);
    let path = write_config(dir.path(), &cfg);
    let out = resonant(&["sweep", "ell", "6", "7", "2", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("out/run.sweep.csv")).unwrap();
    let json: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/run.sweep.json")).unwrap()).unwrap();
    let total: usize = json
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["set"]["candidates"].as_array().unwrap().len())
        .sum();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), total);
    let mut params: Vec<&str> = rows.iter().map(|r| r.split(',').next().unwrap()).collect();
    params.dedup();
    assert_eq!(params, ["6", "7"]);
    assert!(csv.starts_with("param_value,"));
    assert!(dir.path().join("out/run.sweep.svg").exists());

    assert_eq!(resonant(&["sweep", "ell", "6", "7", "1", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn amplitude_sweep_creates_a_bound_state() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = base_config(dir.path());
    cfg["model"] = json!({"kind": "PerturbedCylinder", "ell": std::f64::consts::TAU, "a": 0.0, "w": 0.5});
    cfg["modes"] = json!({"min": 0, "max": 0});
    cfg["window"] = json!([-0.5, 0.5, 0.01, 0.5]);
    cfg["closures"] = json!(["Neumann"]);
    cfg["emit"] = json!(["json"]);
    let path = write_config(dir.path(), &cfg);
    let out = resonant(&["sweep", "a", "0", "10", "2", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let steps: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/run.sweep.json")).unwrap()).unwrap();
    assert!(steps[0]["set"]["candidates"].as_array().unwrap().is_empty());
    let found = steps[1]["set"]["candidates"].as_array().unwrap();
    assert_eq!(found.len(), 1);

    let model = resonant::geometry::ModelSurface::PerturbedCylinder {
        ell: std::f64::consts::TAU,
        a: 10.0,
        w: 0.5,
    };
    let e = resonant::oracle::l2::l2_eigenvalues_closure(&model, 0, resonant::geometry::BoundaryClosure::Neumann, 40.0, 2000)
        .unwrap();
    let im = found[0]["lambda"][1].as_f64().unwrap();
    assert!((im - e[0].lambda_im).abs() < 1e-6);
}
