use std::path::{Path, PathBuf};
use std::process::Command;

fn header_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include")
}

fn cc() -> String {
    std::env::var("CC").unwrap_or_else(|_| "cc".into())
}

const PROGRAM: &str = r#"
#include "resonant.h"
#include <stdio.h>

int main(void) {
    RsModel *model = NULL;
    RsPipelineConfig cfg;
    RsWindow window = {-4.0, 4.0, -3.0, 0.5};
    RsResonanceSet *set = NULL;
    size_t len = 0;
    if (rs_model_cylinder(6.283185307179586, &model) != RS_STATUS_OK) return 1;
    rs_pipeline_config_default(&cfg);
    cfg.closures = RS_CLOSURE_MASK_DIRICHLET | RS_CLOSURE_MASK_NEUMANN;
    if (rs_compute_resonances(model, 0, 1, window, &cfg, &set) != RS_STATUS_OK) {
        char msg[256];
        rs_last_error_message(msg, sizeof msg);
        fprintf(stderr, "%s\n", msg);
        return 1;
    }
    rs_resonance_set_len(set, &len);
    for (size_t i = 0; i < len; ++i) {
        RsCandidate c;
        rs_resonance_set_get(set, i, &c);
        printf("%lld %d %.12f %.12f\n", (long long)c.mode_k, (int)c.closure, c.lambda.re, c.lambda.im);
    }
    rs_resonance_set_free(set);
    rs_model_free(model);
    return 0;
}
"#;

#[test]
fn header_is_valid_c_and_cpp() {
    let header = header_dir().join("resonant.h");
    assert!(header.exists(), "header not generated");
    for lang in ["c", "c++"] {
        let status = Command::new(cc())
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(&header)
            .status()
            .expect("C compiler available");
        assert!(status.success(), "{lang} syntax check failed");
    }
}

/// `target/<profile>`, found from the test executable in `target/<profile>/deps`.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

/// Builds the static library for the profile this test was compiled in.
fn static_library() -> PathBuf {
    let profile = profile_dir();
    let mut cmd = Command::new(std::env::var("CARGO").unwrap_or_else(|_| "cargo".into()));
    cmd.args(["build", "--quiet", "-p", "resonant-ffi", "--lib"])
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .env("CARGO_TARGET_DIR", profile.parent().unwrap());
    if profile.file_name().is_some_and(|n| n == "release") {
        cmd.arg("--release");
    }
    assert!(cmd.status().expect("cargo available").success());
    profile.join("libresonant_ffi.a")
}

#[test]
fn c_client_links_and_runs() {
    let lib = static_library();
    assert!(lib.exists(), "{} missing", lib.display());
    let dir = tempfile_dir();
    let src = dir.join("client.c");
    let exe = dir.join("client");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new(cc())
        .args(["-std=c99", "-Wall", "-Werror"])
        .arg("-I")
        .arg(header_dir())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect())
        .collect();
    // Mode 0: -i/2, -3i/2, -5i/2; mode 1: six values at Re = +-1.
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().any(|r| r[0] == 0.0 && (r[3] + 0.5).abs() < 1e-6));
    std::fs::remove_dir_all(dir).ok();
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("resonant-header-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
