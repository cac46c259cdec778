use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cigar_cli::state_file;

const SMALL: &str = "[problem]\nomega = 256.0\nomegas = [64.0, 256.0, 1024.0]\n\n[grid]\nmodes = 6\naxial_points = 128\nhalf_length = 16.0\n\n[dynamics]\ndt = 2e-3\nt_final = 0.1\nepsilon = 1e-3\nsave_every = 5\n";

fn cigar(dir: &Path, args: &[&str]) -> Output {
    let cfg = dir.join("run.toml");
    if !cfg.exists() {
        fs::write(&cfg, SMALL).unwrap();
    }
    Command::new(env!("CARGO_BIN_EXE_cigar"))
        .arg("--quiet")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(args)
        .output()
        .unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn ground_state_then_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let out = cigar(dir.path(), &["ground-state"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let gs = json(&dir.path().join("out/ground_state.json"));
    assert_eq!(gs["config_hash"].as_str().unwrap().len(), 64);
    assert!(gs["record"]["residual_el_relative"].as_f64().unwrap() < 1e-7);
    let state = dir.path().join("out/ground_state.state");
    let (header, q) = state_file::load(&state).unwrap();
    assert_eq!(header.kind, "ground_state");
    assert_eq!(header.omega, 256.0);
    assert!((cigar_core::field::mass(&q) - 8.0 * std::f64::consts::PI).abs() < 1e-9);

    let state_arg = state.to_str().unwrap();
    let out = cigar(dir.path(), &["spectrum", "--state", state_arg, "--sector", "odd"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("out/spectrum_odd.json"));
    assert!(report["kernel"]["eigenvalue"].as_f64().unwrap().abs() < 1e-5);
    assert!(report["kernel"]["cosine_with_dz_q"].as_f64().unwrap() > 0.999);

    let out = cigar(dir.path(), &["spectrum", "--state", state_arg]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&dir.path().join("out/spectrum_even.json"));
    assert!(report["coercivity"]["min_eig_orthogonal"].as_f64().unwrap() > 0.0);
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert_eq!(cigar(d.path(), &["ground-state"]).status.code(), Some(0));
    }
    let read = |d: &tempfile::TempDir, f: &str| fs::read(d.path().join("out").join(f)).unwrap();
    assert_eq!(read(&a, "ground_state.json"), read(&b, "ground_state.json"));
    assert_eq!(read(&a, "ground_state.state"), read(&b, "ground_state.state"));
}

#[test]
fn check_passes_and_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), "[grid]\nmodes = 6\naxial_points = 128\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cigar"))
        .args(["--config", dir.path().join("run.toml").to_str().unwrap()])
        .args(["--out", dir.path().join("out").to_str().unwrap(), "check"])
        .env("RUST_LOG", "error")
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("GN corpus max ratio"));
    assert!(!stdout.contains("FAIL"));
    let report = json(&dir.path().join("out/check.json"));
    assert_eq!(report["status"], "pass");
}

#[test]
fn sweep_writes_csv_with_slope_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = cigar(dir.path(), &["sweep"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "omega,p1_mass,sigma_y,dz_p1,h1_parallel_err,mu_err,energy_err,sigma_total_err"
    );
    assert_eq!(lines.len(), 5);
    let slope: Vec<f64> = lines[4].split(',').skip(1).map(|s| s.parse().unwrap()).collect();
    assert_eq!(slope.len(), 7);
    assert!(slope.iter().all(|s| *s < -0.4), "{slope:?}");
}

#[test]
fn evolve_writes_diagnostics_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cigar(dir.path(), &["ground-state"]).status.code(), Some(0));
    let state = dir.path().join("out/ground_state.state");
    let out = cigar(dir.path(), &["evolve", "--state", state.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/diagnostics.csv")).unwrap();
    assert!(csv.starts_with("t,mass,energy,orbital_distance,p1_mass,virial"));
    assert_eq!(csv.lines().count(), 1 + 11);
    let traj = json(&dir.path().join("out/trajectory.json"));
    assert!(traj["mass_drift"].as_f64().unwrap() < 1e-10);
    let d = traj["max_orbital_distance"].as_f64().unwrap();
    assert!(d > 5e-4 && d < 1e-2, "{d}");
    let snaps = traj["snapshots"].as_array().unwrap();
    assert!(!snaps.is_empty() && snaps.len() <= 500);
    let last = snaps.last().unwrap()["file"].as_str().unwrap();
    let (h, _) = state_file::load(&dir.path().join("out").join(last)).unwrap();
    assert_eq!(h.kind, "snapshot");
    assert!((h.time - 0.1).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), "[grid]\nbogus = 3\n").unwrap();
    let out = cigar(dir.path(), &["ground-state"]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["exit_code"], 2);

    let dir = tempfile::tempdir().unwrap();
    let out = cigar(dir.path(), &["spectrum"]);
    assert_eq!(out.status.code(), Some(2));

    let bad = dir.path().join("v9.state");
    fs::write(&bad, b"cigar-state 9 0000000030\nend\n").unwrap();
    let out = cigar(dir.path(), &["evolve", "--state", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("version 9"));
}
