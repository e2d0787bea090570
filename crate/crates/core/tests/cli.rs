use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn instance(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name)
}

fn relpow(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relpow"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn matrix(stdout: &[u8]) -> Vec<Vec<[f64; 2]>> {
    serde_json::from_slice(stdout).unwrap()
}

fn close(m: &[Vec<[f64; 2]>], want: &[[f64; 2]], tol: f64) {
    for (i, row) in want.iter().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            let z = m[i][j];
            assert!((z[0] - w).abs() < tol && z[1].abs() < tol, "({i},{j}) = {z:?}, want {w}");
        }
    }
}

#[test]
fn resolve_pencil() {
    let dir = tempfile::tempdir().unwrap();
    let p = instance("pencil.json");
    let o = relpow(dir.path(), &["resolve", "--instance", p.to_str().unwrap(), "--lambda", "1,0"]);
    assert_eq!(o.status.code(), Some(0));
    close(&matrix(&o.stdout), &[[0.5, 0.0], [0.0, 0.0]], 1e-12);
}

#[test]
fn resolve_at_eigenvalue_is_numeric_failure() {
    let dir = tempfile::tempdir().unwrap();
    let p = instance("pencil.json");
    let o = relpow(dir.path(), &["resolve", "--instance", p.to_str().unwrap(), "--lambda", "-1,0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not in C-resolvent set"));
}

#[test]
fn power_diag_all_routes() {
    let dir = tempfile::tempdir().unwrap();
    let p = instance("diag.json");
    for route in ["contour", "balakrishnan", "moment"] {
        let o = relpow(
            dir.path(),
            &["power", "--instance", p.to_str().unwrap(), "--b", "0.5,0", "--route", route],
        );
        assert_eq!(o.status.code(), Some(0), "{route}");
        // C1 = I, so the moment route's extra C1^n factor is invisible
        close(&matrix(&o.stdout), &[[1.0, 0.0], [0.0, 0.5]], 1e-6);
    }
}

#[test]
fn verify_writes_report_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let p = instance("diag.json");
    let args = ["verify", "--id", "all", "--instance", p.to_str().unwrap(), "--seed", "5"];
    let o = relpow(dir.path(), &args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let first = std::fs::read(dir.path().join("report.json")).unwrap();
    let reports: serde_json::Value = serde_json::from_slice(&first).unwrap();
    let arr = reports.as_array().unwrap();
    assert_eq!(arr.len(), 19);
    assert!(arr.iter().all(|r| r["pass"] == true));
    assert!(arr.iter().all(|r| r["seed"] == 5));
    let o = Command::new(env!("CARGO_BIN_EXE_relpow"))
        .current_dir(dir.path())
        .env("RELPOW_THREADS", "1")
        .args(args)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(dir.path().join("report.json")).unwrap(), first);
}

#[test]
fn control_run_fails_but_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let p = instance("pencil.json");
    let o = relpow(
        dir.path(),
        &["verify", "--id", "resolvent_eq", "--instance", p.to_str().unwrap(), "--control", "--out", "ctl.json"],
    );
    assert_eq!(o.status.code(), Some(1));
    let r: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("ctl.json")).unwrap()).unwrap();
    assert_eq!(r[0]["pass"], false);
    assert_eq!(r[0]["control"], true);
}

#[test]
fn config_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"defaults": {"samples": 2, "tol_alg": 1e-12}}"#).unwrap();
    let p = instance("pencil.json");
    let o = relpow(
        dir.path(),
        &["verify", "--id", "resolvent_eq", "--instance", p.to_str().unwrap(), "--config", cfg.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(r[0]["samples"].as_array().unwrap().len(), 2);
    assert_eq!(r[0]["tol"], 1e-12);
}

#[test]
fn evolve_csv_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let p = instance("pencil.json");
    let args = [
        "evolve",
        "--instance",
        p.to_str().unwrap(),
        "--problem",
        "p2",
        "--x",
        "1,0",
        "--x",
        "0,-1",
        "--times",
        "0.5,1,2",
        "--csv",
        "traj.csv",
    ];
    assert_eq!(relpow(dir.path(), &args).status.code(), Some(0));
    let first = std::fs::read_to_string(dir.path().join("traj.csv")).unwrap();
    let lines: Vec<_> = first.lines().collect();
    assert_eq!(lines[0], "t,x0_re,x0_im,x1_re,x1_im");
    assert_eq!(lines.len(), 4);
    // S_{1/2}(t) e1 = e^{-t} e1 for the pencil
    let row: Vec<f64> = lines[2].split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row[1] - (-1.0f64).exp()).abs() < 1e-8);
    assert_eq!(relpow(dir.path(), &args).status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(dir.path().join("traj.csv")).unwrap(), first);
    let r: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(r["identity_id"], "evolve_p2");
    assert_eq!(r["pass"], true);
}

#[test]
fn evolve_fractional_problem() {
    let dir = tempfile::tempdir().unwrap();
    let p = instance("diag.json");
    let o = relpow(
        dir.path(),
        &[
            "evolve", "--instance", p.to_str().unwrap(), "--problem", "fp", "--beta", "1.5", "--theta", "0.2", "--x",
            "1,0", "--x", "0,1",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn certify_diag() {
    let dir = tempfile::tempdir().unwrap();
    let p = instance("diag.json");
    let o = relpow(dir.path(), &["certify", "--instance", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let cert: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((cert["sup_weighted_norm"].as_f64().unwrap() - 3.0).abs() < 1e-9);
    let o = relpow(dir.path(), &["certify", "--instance", p.to_str().unwrap(), "--bound", "2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = instance("diag.json");
    let p = p.to_str().unwrap();
    for args in [
        vec!["verify", "--id", "no_such_identity", "--instance", p],
        vec!["resolve", "--instance", p, "--lambda", "1"],
        vec!["power", "--instance", p, "--b", "0.5,0", "--route", "spectral"],
        vec!["evolve", "--instance", p, "--problem", "p2", "--x", "1,0"],
        vec!["bogus"],
    ] {
        let o = relpow(dir.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}
