//! Sweeps in `omega` measuring the distance of `Q_omega` to `Q_inf Phi_0`,
//! with log-log slope fits.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::basis::Discretization;
use crate::field::{
    dz, embed_1d, mass, parallel_component, project_p1, sigma_equiv_norm, sigma_y_norm_sq, Field1D,
    SpectralField3D,
};
use crate::minimizer::{minimize, FlowConfig, GroundStateRecord, MinimizeError};
use crate::soliton::{soliton, solve_1d_ground_state, Flow1DConfig, Soliton1D, SolitonError};

/// Column names in output order.
pub const COLUMNS: [&str; 7] = [
    "p1_mass",
    "sigma_y",
    "dz_p1",
    "h1_parallel_err",
    "mu_err",
    "energy_err",
    "sigma_total_err",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("non-positive value at index {0}")]
    NonPositive(usize),
    #[error("xs and ys differ in length")]
    LengthMismatch,
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("need at least 3 omegas spanning a decade")]
    BadOmegas,
    #[error(transparent)]
    Reference(#[from] SolitonError),
    #[error("minimization failed at omega = {omega}: {source}")]
    Minimize {
        omega: f64,
        #[source]
        source: MinimizeError,
        /// Rows completed before the failure.
        partial: Vec<SweepRow>,
    },
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Result<SlopeFit, FitError> {
    if xs.len() != ys.len() {
        return Err(FitError::LengthMismatch);
    }
    if xs.len() < 3 {
        return Err(FitError::TooFewPoints(xs.len()));
    }
    if let Some(i) = xs.iter().zip(ys).position(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(FitError::NonPositive(i));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    Ok(linear_fit(&lx, &ly))
}

/// Ordinary least squares `y = slope x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> SlopeFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    SlopeFit {
        slope,
        intercept,
        r_squared,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub omega: f64,
    /// `||P_1 Q||_{L^2}`.
    pub p1_mass: f64,
    /// `||Q||_{Sigma_y}`.
    pub sigma_y: f64,
    pub dz_p1: f64,
    pub h1_parallel_err: f64,
    pub mu_err: f64,
    pub energy_err: f64,
    pub sigma_total_err: f64,
    pub mu: f64,
    pub energy: f64,
    pub iterations: usize,
}

impl SweepRow {
    pub fn columns(&self) -> [f64; 7] {
        [
            self.p1_mass,
            self.sigma_y,
            self.dz_p1,
            self.h1_parallel_err,
            self.mu_err,
            self.energy_err,
            self.sigma_total_err,
        ]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub mass: f64,
    pub rows: Vec<SweepRow>,
    /// One fit per entry of [`COLUMNS`]; `None` when a column has a
    /// non-positive entry.
    pub slopes: Vec<Option<SlopeFit>>,
    pub reference_mu: f64,
    pub reference_energy: f64,
    /// `Sigma`-equivalent distance between the warm-started state at the
    /// largest omega and a cold start there.
    pub cold_start_distance: f64,
    #[serde(skip)]
    pub records: Vec<GroundStateRecord>,
}

impl SweepResult {
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.columns()[j]).collect()
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.omega).collect()
    }
}

/// The discrete 1D ground state on the axial grid of `disc`, started from the
/// closed form.
pub fn reference_soliton(disc: &Arc<Discretization>, m: f64) -> Result<Soliton1D, SolitonError> {
    let grid = disc.grid_handle();
    let exact = soliton(m, &grid)?;
    solve_1d_ground_state(m, &grid, &Flow1DConfig::default(), Some(&exact.profile))
}

/// Error columns of one record against the 1D reference.
pub fn sweep_row(rec: &GroundStateRecord, reference: &Soliton1D) -> SweepRow {
    let q = &rec.state;
    let disc = q.discretization();
    let p1 = project_p1(q);
    let par = parallel_component(q);
    let diff_par = Field1D::new(
        disc.grid_handle(),
        par.values().iter().zip(reference.profile.values()).map(|(a, b)| a - b).collect(),
    )
    .expect("same grid");
    let diff = q.sub(&embed_1d(disc, &reference.profile)).expect("same disc");
    SweepRow {
        omega: rec.omega,
        p1_mass: mass(&p1).sqrt(),
        sigma_y: sigma_y_norm_sq(q).sqrt(),
        dz_p1: mass(&dz(&p1)).sqrt(),
        h1_parallel_err: diff_par.h1_norm_sq().sqrt(),
        mu_err: (rec.mu - reference.mu).abs(),
        energy_err: (rec.energy - reference.energy).abs(),
        sigma_total_err: sigma_equiv_norm(&diff),
        mu: rec.mu,
        energy: rec.energy,
        iterations: rec.iterations,
    }
}

/// Runs the minimizer at each `omega` (ascending, each warm-started from the
/// previous state), then one cold start at the largest `omega` as an
/// independence check.
pub fn sweep(
    disc: &Arc<Discretization>,
    omegas: &[f64],
    m: f64,
    cfg: &FlowConfig,
) -> Result<SweepResult, SweepError> {
    let mut omegas = omegas.to_vec();
    omegas.sort_by(f64::total_cmp);
    if omegas.len() < 3 || !(omegas[0] > 0.0) || omegas[omegas.len() - 1] < 10.0 * omegas[0] {
        return Err(SweepError::BadOmegas);
    }
    let reference = reference_soliton(disc, m)?;
    let mut rows = Vec::with_capacity(omegas.len());
    let mut records: Vec<GroundStateRecord> = Vec::with_capacity(omegas.len());
    for &omega in &omegas {
        let init = records.last().map(|r| &r.state);
        match minimize(disc, omega, m, cfg, init) {
            Ok(rec) => {
                rows.push(sweep_row(&rec, &reference));
                records.push(rec);
            }
            Err(source) => {
                return Err(SweepError::Minimize {
                    omega,
                    source,
                    partial: rows,
                })
            }
        }
    }
    let top = *omegas.last().expect("non-empty");
    let cold = minimize(disc, top, m, cfg, None).map_err(|source| SweepError::Minimize {
        omega: top,
        source,
        partial: rows.clone(),
    })?;
    let warm = &records.last().expect("non-empty").state;
    let cold_start_distance = sigma_equiv_norm(&cold.state.sub(warm).expect("same disc"));
    Ok(assemble(m, rows, records, &reference, cold_start_distance))
}

/// Cold-starts every `omega` independently and in parallel.
pub fn sweep_cold(
    disc: &Arc<Discretization>,
    omegas: &[f64],
    m: f64,
    cfg: &FlowConfig,
) -> Result<SweepResult, SweepError> {
    let mut omegas = omegas.to_vec();
    omegas.sort_by(f64::total_cmp);
    if omegas.len() < 3 || !(omegas[0] > 0.0) || omegas[omegas.len() - 1] < 10.0 * omegas[0] {
        return Err(SweepError::BadOmegas);
    }
    let reference = reference_soliton(disc, m)?;
    let results: Vec<_> = omegas
        .par_iter()
        .map(|&omega| (omega, minimize(disc, omega, m, cfg, None)))
        .collect();
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for (omega, res) in results {
        match res {
            Ok(rec) => {
                rows.push(sweep_row(&rec, &reference));
                records.push(rec);
            }
            Err(source) => {
                return Err(SweepError::Minimize {
                    omega,
                    source,
                    partial: rows,
                })
            }
        }
    }
    Ok(assemble(m, rows, records, &reference, 0.0))
}

fn assemble(
    m: f64,
    rows: Vec<SweepRow>,
    records: Vec<GroundStateRecord>,
    reference: &Soliton1D,
    cold_start_distance: f64,
) -> SweepResult {
    let xs: Vec<f64> = rows.iter().map(|r| r.omega).collect();
    let slopes = (0..COLUMNS.len())
        .map(|j| {
            let ys: Vec<f64> = rows.iter().map(|r| r.columns()[j]).collect();
            fit_slope(&xs, &ys).ok()
        })
        .collect();
    SweepResult {
        mass: m,
        rows,
        slopes,
        reference_mu: reference.mu,
        reference_energy: reference.energy,
        cold_start_distance,
        records,
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("k / eta must be a positive integer (k = {k}, eta = {eta})")]
pub struct BadExponent {
    pub k: u32,
    pub eta: f64,
}

/// `||(H_y - d_z^2)^k (Q_omega - Q_inf Phi_0)||_{L^2}`, evaluated spectrally.
pub fn high_norm_convergence(
    state: &SpectralField3D,
    reference: &Field1D,
    k: u32,
    eta: f64,
) -> Result<f64, BadExponent> {
    let ratio = k as f64 / eta;
    if !(eta > 0.0 && eta <= 1.0) || (ratio - ratio.round()).abs() > 1e-9 {
        return Err(BadExponent { k, eta });
    }
    let disc = state.discretization();
    let diff = state.sub(&embed_1d(disc, reference)).expect("same disc");
    Ok(high_norm(&diff, k))
}

/// `||(H_y - d_z^2)^k u||_{L^2}`.
pub fn high_norm(u: &SpectralField3D, k: u32) -> f64 {
    let disc = u.discretization();
    let nz = disc.points();
    let xi = disc.grid().wavenumbers();
    let basis = disc.basis();
    let sum: f64 = u
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| (basis.eigenvalue(i / nz) + xi[i % nz].powi(2)).powi(2 * k as i32) * c.norm_sqr())
        .sum();
    (sum * disc.grid().measure()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::GridParams;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_power_law() {
        let f = fit_slope(&[64.0, 128.0, 256.0], &[1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0]).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        let c = fit_slope(&[1.0, 2.0, 5.0, 9.0], &[3.0; 4]).unwrap();
        assert!(c.slope.abs() < 1e-12);
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xs: Vec<f64> = (0..8).map(|i| 16.0 * 2f64.powi(i)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (1.0 + 0.01 * rng.random_range(-1.0..1.0)) / x).collect();
        let f = fit_slope(&xs, &ys).unwrap();
        assert!(f.slope >= -1.05 && f.slope <= -0.95, "{f:?}");
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert_eq!(fit_slope(&[1.0, 2.0], &[1.0, 2.0]), Err(FitError::TooFewPoints(2)));
        assert_eq!(fit_slope(&[1.0, 2.0, 3.0], &[1.0, 0.0, 2.0]), Err(FitError::NonPositive(1)));
        assert_eq!(fit_slope(&[1.0, 2.0, 3.0], &[1.0]), Err(FitError::LengthMismatch));
    }

    #[test]
    fn high_norm_cases() {
        let d = Discretization::new(GridParams::new(3, 8.0, 64)).unwrap();
        let zero_ref = Field1D::zeros(d.grid_handle());
        let z = SpectralField3D::zeros(&d);
        assert_eq!(high_norm_convergence(&z, &zero_ref, 1, 0.5).unwrap(), 0.0);
        assert!(high_norm_convergence(&z, &zero_ref, 1, 0.4).is_err());

        let mut c = vec![Complex64::new(0.0, 0.0); d.len()];
        c[2 * 64 + 3] = Complex64::new(0.5, 0.0);
        let u = SpectralField3D::from_coeffs(&d, c, false).unwrap();
        let sym = d.basis().eigenvalue(2) + d.grid().wavenumbers()[3].powi(2);
        let expect = sym * mass(&u).sqrt();
        assert!((high_norm_convergence(&u, &zero_ref, 1, 0.5).unwrap() - expect).abs() < 1e-12 * expect);
        assert!((high_norm(&u, 2) - sym * expect).abs() < 1e-12 * sym * expect);
    }

    #[test]
    fn sweep_needs_a_decade() {
        let d = Discretization::new(GridParams::new(3, 16.0, 128)).unwrap();
        let r = sweep(&d, &[64.0, 128.0, 256.0], 8.0 * std::f64::consts::PI, &FlowConfig::default());
        assert!(matches!(r, Err(SweepError::BadOmegas)));
    }
}
