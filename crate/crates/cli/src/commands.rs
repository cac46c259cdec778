//! The five subcommands. Each returns the exit code it wants.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use cigar_core::dynamics::{evolve_3d, radial_even_perturbation, EvolveOptions};
use cigar_core::field::{dz, mass, Norms};
use cigar_core::inequality::{gn_ratio, CORPUS_SIZE, interpolation_check, standard_corpus, GN_CHECK_CONSTANT};
use cigar_core::linearized::{assemble_l3d_with, coercivity_check, default_axial_modes, Sector};
use cigar_core::minimizer::{
    el_scale, energy_identity_check, forbidden_region_bound, minimize, pohozaev_scale, GroundStateRecord,
};
use cigar_core::reduction::{sweep, SweepError, COLUMNS};
use cigar_core::soliton::{chemical_potential, solve_1d_ground_state, soliton, Flow1DConfig};
use cigar_core::Discretization;
use log::info;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::state_file::{self, StateFileError, StateMeta};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Most snapshots written by `evolve`.
pub const MAX_SNAPSHOTS: usize = 500;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("state file {path}: {source}")]
    State {
        path: PathBuf,
        #[source]
        source: StateFileError,
    },
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::State { .. } | CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical(_) | CliError::Output { .. } => EXIT_NUMERICAL,
        }
    }

    /// Machine-readable form written to stderr.
    pub fn report(&self) -> Value {
        json!({ "status": "error", "exit_code": self.exit_code(), "message": self.to_string() })
    }
}

fn numerical(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
    text.push('\n');
    write(path, text)
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = cfg.run.out_dir.clone();
    fs::create_dir_all(&dir).map_err(|source| CliError::Output {
        path: dir.clone(),
        source,
    })?;
    Ok(dir)
}

fn discretization(cfg: &RunConfig) -> Result<Arc<Discretization>, CliError> {
    Discretization::new(cfg.grid_params()).map_err(|e| CliError::Usage(format!("grid: {e}")))
}

fn record_json(rec: &GroundStateRecord, cfg: &RunConfig) -> Value {
    let n = Norms::of(&rec.state);
    let scale_el = el_scale(&rec.state, rec.mu);
    let scale_p = pohozaev_scale(&n, rec.mu, rec.omega);
    json!({
        "omega": rec.omega,
        "mass": rec.mass,
        "mu": rec.mu,
        "mu_flow": rec.mu_flow,
        "energy": rec.energy,
        "residual_el": rec.residual_el,
        "residual_el_relative": rec.residual_el / scale_el,
        "sigma_y_sq": rec.sigma_y_sq,
        "dz_sq": n.dz_sq,
        "l4_4": n.l4_4,
        "pohozaev_res": [rec.pohozaev_res.0, rec.pohozaev_res.1],
        "pohozaev_relative": [rec.pohozaev_res.0 / scale_p, rec.pohozaev_res.1 / scale_p],
        "energy_identity": energy_identity_check(rec),
        "forbidden_bound": forbidden_region_bound(rec.mass, rec.omega, cfg.run.c_gn),
        "iterations": rec.iterations,
        "max_energy_increase": rec.max_energy_increase,
    })
}

fn ground_state(cfg: &RunConfig) -> Result<GroundStateRecord, CliError> {
    let disc = discretization(cfg)?;
    minimize(&disc, cfg.problem.omega, cfg.problem.mass, &cfg.flow_config(), None).map_err(numerical)
}

pub fn cmd_ground_state(cfg: &RunConfig) -> Result<i32, CliError> {
    let rec = ground_state(cfg)?;
    let dir = out_dir(cfg)?;
    let meta = StateMeta {
        kind: "ground_state".into(),
        omega: rec.omega,
        mass: rec.mass,
        mu: rec.mu,
        energy: rec.energy,
        time: 0.0,
    };
    let state_path = dir.join("ground_state.state");
    state_file::save(&state_path, &rec.state, &meta).map_err(|source| CliError::State {
        path: state_path.clone(),
        source,
    })?;
    write_json(
        &dir.join("ground_state.json"),
        &json!({
            "command": "ground-state",
            "config_hash": cfg.hash(),
            "state_file": "ground_state.state",
            "record": record_json(&rec, cfg),
        }),
    )?;
    info!("ground state: mu = {:.12}, E = {:.12}, {} iterations", rec.mu, rec.energy, rec.iterations);
    Ok(EXIT_OK)
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<i32, CliError> {
    let disc = discretization(cfg)?;
    let result = match sweep(&disc, &cfg.problem.omegas, cfg.problem.mass, &cfg.flow_config()) {
        Ok(r) => r,
        Err(SweepError::BadOmegas) => {
            return Err(CliError::Usage("problem.omegas needs 3 values spanning a decade".into()))
        }
        Err(e) => return Err(numerical(e)),
    };
    let dir = out_dir(cfg)?;
    let mut csv = String::from("omega");
    for c in COLUMNS {
        csv.push(',');
        csv.push_str(c);
    }
    csv.push('\n');
    for row in &result.rows {
        let _ = write!(csv, "{:?}", row.omega);
        for v in row.columns() {
            let _ = write!(csv, ",{v:.12e}");
        }
        csv.push('\n');
    }
    csv.push_str("slope");
    for s in &result.slopes {
        match s {
            Some(f) => {
                let _ = write!(csv, ",{:.6}", f.slope);
            }
            None => csv.push_str(",nan"),
        }
    }
    csv.push('\n');
    write(&dir.join("sweep.csv"), csv)?;
    let slopes: serde_json::Map<String, Value> = COLUMNS
        .iter()
        .zip(&result.slopes)
        .map(|(c, s)| (c.to_string(), serde_json::to_value(s).expect("plain struct")))
        .collect();
    write_json(
        &dir.join("sweep.json"),
        &json!({
            "command": "sweep",
            "config_hash": cfg.hash(),
            "mass": result.mass,
            "omegas": result.omegas(),
            "reference_mu": result.reference_mu,
            "reference_energy": result.reference_energy,
            "cold_start_distance": result.cold_start_distance,
            "slopes": slopes,
            "rows": result.rows,
        }),
    )?;
    Ok(EXIT_OK)
}

fn load_state(path: &Path) -> Result<(state_file::StateHeader, cigar_core::SpectralField3D), CliError> {
    state_file::load(path).map_err(|source| CliError::State {
        path: path.to_path_buf(),
        source,
    })
}

pub fn cmd_spectrum(cfg: &RunConfig, state: &Path, sector: Sector) -> Result<i32, CliError> {
    let (header, q) = load_state(state)?;
    let omega = header.omega;
    let a_max = default_axial_modes(q.discretization().grid());
    let op = assemble_l3d_with(&q, omega, header.mu, sector, a_max).map_err(numerical)?;
    let pairs = op.eigenpairs();
    let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut report = json!({
        "command": "spectrum",
        "config_hash": cfg.hash(),
        "state_file": state.display().to_string(),
        "omega": omega,
        "mu": header.mu,
        "sector": sector.to_string(),
        "axial_modes": a_max,
        "dimension": op.dim(),
        "asymmetry": op.asymmetry(),
        "eigenvalues": eigenvalues,
    });
    if sector == Sector::Even {
        let c = coercivity_check(&op, &op.vector_3d(&q)).map_err(numerical)?;
        report["coercivity"] = serde_json::to_value(c).expect("plain struct");
    }
    if sector != Sector::Even {
        let t = op.vector_3d(&dz(&q));
        if let Some((lambda, v)) = pairs.iter().min_by(|a, b| a.0.abs().total_cmp(&b.0.abs())) {
            let cosine = (v.dot(&t) / t.norm()).abs();
            report["kernel"] = json!({ "eigenvalue": lambda, "cosine_with_dz_q": cosine });
        }
    }
    let dir = out_dir(cfg)?;
    write_json(&dir.join(format!("spectrum_{sector}.json")), &report)?;
    Ok(EXIT_OK)
}

pub fn cmd_evolve(cfg: &RunConfig, state: &Path, omega_override: Option<f64>) -> Result<i32, CliError> {
    let (header, q) = load_state(state)?;
    let omega = omega_override.unwrap_or(header.omega);
    let disc = Arc::clone(q.discretization());
    let mut u0 = q.clone();
    if cfg.dynamics.epsilon > 0.0 {
        let eta = radial_even_perturbation(&disc, cfg.run.seed);
        u0 = u0.add(&eta.scaled(cfg.dynamics.epsilon)).expect("same disc");
        u0 = u0.scaled((mass(&q) / mass(&u0)).sqrt());
    }
    let opts = EvolveOptions {
        save_every: cfg.dynamics.save_every,
        keep_snapshots: true,
        nonlinearity: 1.0,
        reference: (header.kind == "ground_state").then(|| q.clone()),
    };
    let traj = evolve_3d(&u0, omega, cfg.dynamics.t_final, cfg.dynamics.dt, &opts).map_err(numerical)?;
    let dir = out_dir(cfg)?;
    let snap_dir = dir.join("snapshots");
    fs::create_dir_all(&snap_dir).map_err(|source| CliError::Output {
        path: snap_dir.clone(),
        source,
    })?;
    let stride = traj.snapshots.len().div_ceil(MAX_SNAPSHOTS).max(1);
    let mut written = Vec::new();
    for (i, (snap, t)) in traj.snapshots.iter().zip(&traj.times).enumerate().step_by(stride) {
        let name = format!("snap_{i:05}.state");
        let path = snap_dir.join(&name);
        let n = Norms::of(snap);
        let meta = StateMeta {
            kind: "snapshot".into(),
            omega,
            mass: n.mass,
            mu: header.mu,
            energy: n.energy(omega),
            time: *t,
        };
        state_file::save(&path, snap, &meta).map_err(|source| CliError::State { path, source })?;
        written.push(json!({ "t": t, "file": format!("snapshots/{name}") }));
    }
    let mut csv = String::from("t,mass,energy,orbital_distance,p1_mass,virial,sigma_y_sq\n");
    for d in &traj.diagnostics {
        let orb = d.orbital_distance.map_or("nan".to_string(), |x| format!("{x:.12e}"));
        let _ = writeln!(
            csv,
            "{:?},{:.15e},{:.15e},{},{:.12e},{:.12e},{:.12e}",
            d.t, d.mass, d.energy, orb, d.p1_mass, d.virial, d.sigma_y_sq
        );
    }
    write(&dir.join("diagnostics.csv"), csv)?;
    let bound = forbidden_region_bound(header.mass, omega, cfg.run.c_gn);
    let max_sigma = traj.diagnostics.iter().map(|d| d.sigma_y_sq).fold(0.0, f64::max);
    write_json(
        &dir.join("trajectory.json"),
        &json!({
            "command": "evolve",
            "config_hash": cfg.hash(),
            "state_file": state.display().to_string(),
            "omega": omega,
            "dt": cfg.dynamics.dt,
            "t_final": cfg.dynamics.t_final,
            "epsilon": cfg.dynamics.epsilon,
            "mass_drift": traj.mass_drift(),
            "energy_drift": traj.energy_drift(),
            "max_orbital_distance": traj.max_orbital_distance(),
            "max_sigma_y_sq": max_sigma,
            "forbidden_bound": bound,
            "l4t_linfz": traj.l4t_linfz(),
            "snapshots": written,
        }),
    )?;
    Ok(EXIT_OK)
}

/// One row of the `check` table.
#[derive(Clone, Debug, serde::Serialize)]
pub struct CheckRow {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

fn row(name: &str, value: f64, bound: f64) -> CheckRow {
    CheckRow {
        name: name.into(),
        value,
        bound,
        pass: value <= bound,
    }
}

pub fn check_rows(cfg: &RunConfig) -> Result<Vec<CheckRow>, CliError> {
    let disc = discretization(cfg)?;
    let corpus = standard_corpus(&disc, cfg.run.seed, CORPUS_SIZE);
    let mut rows = Vec::new();

    let gn_max = corpus
        .iter()
        .filter_map(|u| gn_ratio(u).ok())
        .fold(0.0, f64::max);
    rows.push(row("GN corpus max ratio", gn_max, GN_CHECK_CONSTANT));
    for (k, theta, label) in [(1, 0.5, "1,1/2"), (1, 1.0 / 3.0, "1,1/3"), (2, 0.5, "2,1/2")] {
        let mut worst = f64::NEG_INFINITY;
        for u in &corpus {
            let r = interpolation_check(u, k, theta).map_err(numerical)?;
            if r.rhs > 0.0 {
                worst = worst.max(r.lhs / r.rhs - 1.0);
            }
        }
        rows.push(row(&format!("interpolation ({label}) excess"), worst, 1e-10));
    }

    let m = cfg.problem.mass;
    let grid = disc.grid_handle();
    let mu_inf = chemical_potential(m);
    if let Ok(exact) = soliton(m, &grid) {
        let flow = solve_1d_ground_state(m, &grid, &Flow1DConfig::default(), Some(&exact.profile))
            .map_err(numerical)?;
        rows.push(row("1D multiplier error", (flow.mu - mu_inf).abs(), 1e-6));
    }

    let rec = ground_state(cfg)?;
    let n = Norms::of(&rec.state);
    rows.push(row(
        "EL residual (relative)",
        rec.residual_el / el_scale(&rec.state, rec.mu),
        1e-7,
    ));
    let ps = pohozaev_scale(&n, rec.mu, rec.omega);
    rows.push(row("Pohozaev mass pairing (relative)", rec.pohozaev_res.0.abs() / ps, 1e-6));
    rows.push(row("Pohozaev dilation pairing (relative)", rec.pohozaev_res.1.abs() / ps, 1e-6));
    rows.push(row(
        "energy identity (relative)",
        energy_identity_check(&rec).abs() / rec.energy.abs(),
        1e-6,
    ));
    rows.push(row(
        "forbidden region sigma_y_sq",
        rec.sigma_y_sq,
        forbidden_region_bound(m, rec.omega, cfg.run.c_gn),
    ));
    rows.push(row("interior constraint sigma_y_sq", rec.sigma_y_sq, rec.omega.sqrt()));
    rows.push(row("energy sign", rec.energy, 0.0));
    rows.push(row("multiplier sign (-mu)", -rec.mu, 0.0));
    Ok(rows)
}

pub fn format_table(rows: &[CheckRow]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for r in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>14.6e}  <= {:<12.4e}  {}",
            r.name,
            r.value,
            r.bound,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    out
}

pub fn cmd_check(cfg: &RunConfig, quiet: bool) -> Result<i32, CliError> {
    let rows = check_rows(cfg)?;
    let all = rows.iter().all(|r| r.pass);
    if !quiet {
        print!("{}", format_table(&rows));
    }
    let dir = out_dir(cfg)?;
    write_json(
        &dir.join("check.json"),
        &json!({
            "command": "check",
            "config_hash": cfg.hash(),
            "status": if all { "pass" } else { "fail" },
            "rows": rows,
        }),
    )?;
    Ok(if all { EXIT_OK } else { EXIT_CHECK_FAILED })
}
