//! Strang-split time stepping for the 3D equation
//! `i u_t = (omega (H_y - 2) - d_z^2) u - |u|^2 u` and the 1D limit
//! `i v_t = -v_zz - (1/2pi) |v|^2 v`, with conservation, orbital-distance and
//! reduction diagnostics.

use std::f64::consts::PI;
use std::sync::Arc;

use log::warn;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::align::align;
use crate::basis::{AxialGrid, Discretization};
use crate::field::{
    cubic_term, embed_1d, mass, parallel_component, project_p1, sigma_equiv_norm, Field1D, Norms,
    SpectralField3D,
};
use crate::minimizer::GroundStateRecord;
use crate::reduction::{linear_fit, SlopeFit};

/// Relative change at which the implicit-midpoint iteration stops.
const MIDPOINT_TOL: f64 = 1e-15;
const MIDPOINT_MAX_ITER: usize = 60;
/// Coefficient size treated as a blow-up.
const BLOWUP_LIMIT: f64 = 1e150;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("time step and horizon must be positive (dt = {dt}, T = {t_final})")]
    BadTimes { dt: f64, t_final: f64 },
    #[error("save_every must be at least 1")]
    BadSaveEvery,
    #[error("blow-up suspected: non-finite or huge state after t = {last_valid_time}")]
    BlowUpSuspected { last_valid_time: f64 },
    #[error("nonlinear half-step did not converge at t = {time} (dt too large for the amplitude)")]
    NonlinearSolve { time: f64 },
    #[error("fields live on different discretizations")]
    Incompatible,
}

/// Options shared by the evolution drivers.
#[derive(Clone, Debug)]
pub struct EvolveOptions {
    pub save_every: usize,
    pub keep_snapshots: bool,
    /// Multiplies the cubic term; 0 gives the linear flow.
    pub nonlinearity: f64,
    /// State to measure orbital distance against at each save point.
    pub reference: Option<SpectralField3D>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            save_every: 10,
            keep_snapshots: false,
            nonlinearity: 1.0,
            reference: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub orbital_distance: Option<f64>,
    /// `||P_1 u||_{L^2}`.
    pub p1_mass: f64,
    pub virial: f64,
    pub sigma_y_sq: f64,
    /// `max_z |u_par(t, z)|`.
    pub parallel_sup: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory<F> {
    pub times: Vec<f64>,
    pub snapshots: Vec<F>,
    pub mass_series: Vec<f64>,
    pub energy_series: Vec<f64>,
    pub diagnostics: Vec<Diagnostics>,
    pub final_state: F,
}

impl<F> Trajectory<F> {
    pub fn mass_drift(&self) -> f64 {
        relative_drift(&self.mass_series)
    }

    pub fn energy_drift(&self) -> f64 {
        relative_drift(&self.energy_series)
    }

    pub fn max_orbital_distance(&self) -> Option<f64> {
        self.diagnostics
            .iter()
            .filter_map(|d| d.orbital_distance)
            .fold(None, |a: Option<f64>, d| Some(a.map_or(d, |x| x.max(d))))
    }

    /// `(int_0^T ||u_par||_inf^4 dt)^{1/4}` by the trapezoid rule over the
    /// save points.
    pub fn l4t_linfz(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self.diagnostics.iter().map(|d| (d.t, d.parallel_sup.powi(4))).collect();
        trapezoid(&pts).powf(0.25)
    }
}

/// `max_t |x(t) - x(0)| / |x(0)|` (absolute when `x(0) = 0`).
pub fn relative_drift(series: &[f64]) -> f64 {
    let Some(&x0) = series.first() else { return 0.0 };
    let worst = series.iter().fold(0.0f64, |a, x| a.max((x - x0).abs()));
    if x0 != 0.0 {
        worst / x0.abs()
    } else {
        worst
    }
}

fn trapezoid(pts: &[(f64, f64)]) -> f64 {
    pts.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum()
}

/// `24 E - 4 omega ||u||_Sigma_y^2 - 4 ||d_z u||^2 + 16 omega M`.
pub fn virial_second_derivative(u: &SpectralField3D, omega: f64) -> f64 {
    virial_from_norms(&Norms::of(u), omega)
}

fn virial_from_norms(n: &Norms, omega: f64) -> f64 {
    24.0 * n.energy(omega) - 4.0 * omega * n.sigma_y_sq - 4.0 * n.dz_sq + 16.0 * omega * n.mass
}

/// Strang splitting for the 3D equation between the free axial flow
/// `i u_t = -d_z^2 u` (exact diagonal phase) and the transverse flow
/// `i u_t = omega (H_y - 2) u - g P(|u|^2 u)`. The transverse half-steps use
/// the implicit midpoint rule, which keeps the discrete mass exactly and
/// follows the modes `k >= 1` without resonance when `omega dt` is not
/// small; with `g = 0` they are the exact diagonal phase.
pub struct Propagator3D {
    disc: Arc<Discretization>,
    dt: f64,
    nonlinearity: f64,
    axial_phase: Vec<Complex64>,
    /// `omega (Lambda_k - 2)` per transverse mode.
    gaps: Vec<f64>,
}

impl Propagator3D {
    pub fn new(disc: &Arc<Discretization>, omega: f64, dt: f64, nonlinearity: f64) -> Self {
        let axial_phase = disc
            .grid()
            .wavenumbers()
            .iter()
            .map(|x| Complex64::from_polar(1.0, -dt * x * x))
            .collect();
        let gaps = (0..disc.modes()).map(|k| omega * disc.basis().excitation(k)).collect();
        Propagator3D {
            disc: Arc::clone(disc),
            dt,
            nonlinearity,
            axial_phase,
            gaps,
        }
    }

    fn transverse_half(&self, u: &SpectralField3D, time: f64) -> Result<SpectralField3D, DynamicsError> {
        let h = 0.5 * self.dt;
        let nz = self.disc.points();
        if self.nonlinearity == 0.0 {
            let mut out = u.clone();
            for (row, gap) in out.coeffs_mut().chunks_mut(nz).zip(&self.gaps) {
                let p = Complex64::from_polar(1.0, -h * gap);
                row.iter_mut().for_each(|c| *c *= p);
            }
            out.set_real(false);
            return Ok(out);
        }
        // m = (u0 + u1)/2 solves (1 + i h/2 G) m = u0 + i h/2 g P(|m|^2 m)
        let inv: Vec<Complex64> = self
            .gaps
            .iter()
            .map(|g| Complex64::new(1.0, 0.5 * h * g).inv())
            .collect();
        let factor = Complex64::new(0.0, 0.5 * h * self.nonlinearity);
        let mut mid = u.clone();
        mid.set_real(false);
        for _ in 0..MIDPOINT_MAX_ITER {
            let n = cubic_term(&mid);
            let next: Vec<Complex64> = u
                .coeffs()
                .iter()
                .zip(n.coeffs())
                .enumerate()
                .map(|(i, (a, b))| (a + factor * b) * inv[i / nz])
                .collect();
            let mut change = 0.0f64;
            let mut size = 0.0f64;
            for (a, b) in mid.coeffs().iter().zip(&next) {
                change = change.max((a - b).norm());
                size = size.max(b.norm());
            }
            mid.coeffs_mut().copy_from_slice(&next);
            if change <= MIDPOINT_TOL * size {
                let coeffs: Vec<Complex64> = mid.coeffs().iter().zip(u.coeffs()).map(|(m, a)| 2.0 * m - a).collect();
                return Ok(SpectralField3D::from_coeffs(&self.disc, coeffs, false).expect("same shape"));
            }
        }
        Err(DynamicsError::NonlinearSolve { time })
    }

    pub fn step(&self, u: &SpectralField3D, time: f64) -> Result<SpectralField3D, DynamicsError> {
        let nz = self.disc.points();
        let mut v = self.transverse_half(u, time)?;
        for row in v.coeffs_mut().chunks_mut(nz) {
            row.iter_mut().zip(&self.axial_phase).for_each(|(c, p)| *c *= p);
        }
        self.transverse_half(&v, time)
    }
}

/// Strang splitting for the 1D limit equation with exact pointwise phases.
pub struct Propagator1D {
    grid: Arc<AxialGrid>,
    dt: f64,
    nonlinearity: f64,
    linear_phase: Vec<Complex64>,
}

impl Propagator1D {
    pub fn new(grid: &Arc<AxialGrid>, dt: f64, nonlinearity: f64) -> Self {
        let linear_phase = grid.wavenumbers().iter().map(|x| Complex64::from_polar(1.0, -dt * x * x)).collect();
        Propagator1D {
            grid: Arc::clone(grid),
            dt,
            nonlinearity,
            linear_phase,
        }
    }

    fn nonlinear_half(&self, v: &mut [Complex64]) {
        let c = 0.5 * self.dt * self.nonlinearity / (2.0 * PI);
        if c != 0.0 {
            v.iter_mut().for_each(|x| *x *= Complex64::from_polar(1.0, c * x.norm_sqr()));
        }
    }

    pub fn step(&self, v: &Field1D) -> Field1D {
        let mut vals = v.values().to_vec();
        self.nonlinear_half(&mut vals);
        self.grid.forward_in_place(&mut vals);
        vals.iter_mut().zip(&self.linear_phase).for_each(|(c, p)| *c *= p);
        self.grid.inverse_in_place(&mut vals);
        self.nonlinear_half(&mut vals);
        Field1D::new(Arc::clone(&self.grid), vals).expect("grid-sized")
    }
}

fn check_times(t_final: f64, dt: f64, save_every: usize) -> Result<usize, DynamicsError> {
    if !(dt > 0.0 && t_final > 0.0 && dt.is_finite() && t_final.is_finite()) {
        return Err(DynamicsError::BadTimes { dt, t_final });
    }
    if save_every == 0 {
        return Err(DynamicsError::BadSaveEvery);
    }
    Ok((t_final / dt).round().max(1.0) as usize)
}

fn diagnostics_3d(u: &SpectralField3D, omega: f64, t: f64, reference: Option<&SpectralField3D>) -> Diagnostics {
    let n = Norms::of(u);
    Diagnostics {
        t,
        mass: n.mass,
        energy: n.energy(omega),
        orbital_distance: reference.map(|q| orbital_distance(u, q)),
        p1_mass: mass(&project_p1(u)).sqrt(),
        virial: virial_from_norms(&n, omega),
        sigma_y_sq: n.sigma_y_sq,
        parallel_sup: parallel_component(u).max_abs(),
    }
}

pub fn evolve_3d(
    u0: &SpectralField3D,
    omega: f64,
    t_final: f64,
    dt: f64,
    opts: &EvolveOptions,
) -> Result<Trajectory<SpectralField3D>, DynamicsError> {
    let steps = check_times(t_final, dt, opts.save_every)?;
    let disc = u0.discretization();
    if let Some(q) = &opts.reference {
        if **q.discretization() != **disc {
            return Err(DynamicsError::Incompatible);
        }
    }
    let n0 = Norms::of(u0);
    if n0.energy(omega) >= 0.0 || n0.sigma_y_sq > omega.sqrt() {
        warn!(
            "initial data outside the global-existence regime (E = {:.3e}, ||u||_Sigma_y^2 = {:.3e}, sqrt(omega) = {:.3e})",
            n0.energy(omega),
            n0.sigma_y_sq,
            omega.sqrt()
        );
    }
    let prop = Propagator3D::new(disc, omega, dt, opts.nonlinearity);
    let reference = opts.reference.as_ref();
    let mut traj = Trajectory {
        times: Vec::new(),
        snapshots: Vec::new(),
        mass_series: Vec::new(),
        energy_series: Vec::new(),
        diagnostics: Vec::new(),
        final_state: u0.clone(),
    };
    let record = |traj: &mut Trajectory<SpectralField3D>, u: &SpectralField3D, t: f64| {
        let d = diagnostics_3d(u, omega, t, reference);
        traj.times.push(t);
        traj.mass_series.push(d.mass);
        traj.energy_series.push(d.energy);
        traj.diagnostics.push(d);
        if opts.keep_snapshots {
            traj.snapshots.push(u.clone());
        }
    };
    let mut u = u0.clone();
    record(&mut traj, &u, 0.0);
    let mut t = 0.0;
    for s in 1..=steps {
        let next = prop.step(&u, t)?;
        if !next.is_finite() || next.max_abs_coeff() > BLOWUP_LIMIT {
            return Err(DynamicsError::BlowUpSuspected { last_valid_time: t });
        }
        u = next;
        t = s as f64 * dt;
        if s % opts.save_every == 0 || s == steps {
            record(&mut traj, &u, t);
        }
    }
    traj.final_state = u;
    Ok(traj)
}

pub fn evolve_1d(
    v0: &Field1D,
    t_final: f64,
    dt: f64,
    opts: &EvolveOptions,
) -> Result<Trajectory<Field1D>, DynamicsError> {
    let steps = check_times(t_final, dt, opts.save_every)?;
    let prop = Propagator1D::new(v0.grid(), dt, opts.nonlinearity);
    let mut traj = Trajectory {
        times: Vec::new(),
        snapshots: Vec::new(),
        mass_series: Vec::new(),
        energy_series: Vec::new(),
        diagnostics: Vec::new(),
        final_state: v0.clone(),
    };
    let record = |traj: &mut Trajectory<Field1D>, v: &Field1D, t: f64| {
        let (m, e) = (v.mass(), v.energy_1d());
        traj.times.push(t);
        traj.mass_series.push(m);
        traj.energy_series.push(e);
        traj.diagnostics.push(Diagnostics {
            t,
            mass: m,
            energy: e,
            orbital_distance: None,
            p1_mass: 0.0,
            virial: 0.0,
            sigma_y_sq: 0.0,
            parallel_sup: v.max_abs(),
        });
        if opts.keep_snapshots {
            traj.snapshots.push(v.clone());
        }
    };
    let mut v = v0.clone();
    record(&mut traj, &v, 0.0);
    let mut t = 0.0;
    for s in 1..=steps {
        let next = prop.step(&v);
        if next.values().iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) || next.max_abs() > BLOWUP_LIMIT {
            return Err(DynamicsError::BlowUpSuspected { last_valid_time: t });
        }
        v = next;
        t = s as f64 * dt;
        if s % opts.save_every == 0 || s == steps {
            record(&mut traj, &v, t);
        }
    }
    traj.final_state = v;
    Ok(traj)
}

/// Distance from `u` to the orbit `{exp(i theta) Q(., . - z1)}` in the
/// `Sigma`-equivalent norm, with shift and phase chosen to maximize the
/// `L^2` overlap.
pub fn orbital_distance(u: &SpectralField3D, q: &SpectralField3D) -> f64 {
    let al = align(u, q);
    sigma_equiv_norm(&al.apply(u).sub(q).expect("same discretization"))
}

/// Smooth, radial, even, real perturbation with unit `Sigma`-equivalent norm.
pub fn radial_even_perturbation(disc: &Arc<Discretization>, seed: u64) -> SpectralField3D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nz = disc.points();
    let xi = disc.grid().wavenumbers().to_vec();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); disc.len()];
    for k in 0..disc.modes().min(3) {
        for n in 0..nz {
            let env = (-(xi[n] * 1.2).powi(2) / 2.0).exp();
            if env > 1e-12 {
                coeffs[k * nz + n] = Complex64::new(rng.random_range(-1.0..1.0) * env, 0.0);
            }
        }
    }
    let mut p = SpectralField3D::from_coeffs(disc, coeffs, true).expect("sized by disc");
    p.enforce_even();
    let norm = sigma_equiv_norm(&p);
    p.scaled(1.0 / norm)
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub omega: f64,
    pub epsilon: f64,
    pub initial_distance: f64,
    pub max_distance: f64,
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    pub mass_drift: f64,
    pub energy_drift: f64,
    pub max_sigma_y_sq: f64,
}

/// Evolves `Q + eps * eta` (renormalized to the mass of `Q`) and tracks the
/// orbital distance to `Q`.
pub fn stability_experiment(
    rec: &GroundStateRecord,
    epsilon: f64,
    t_final: f64,
    dt: f64,
    save_every: usize,
    seed: u64,
) -> Result<StabilityReport, DynamicsError> {
    let q = &rec.state;
    let disc = q.discretization();
    let eta = radial_even_perturbation(disc, seed);
    let mut u0 = q.add(&eta.scaled(epsilon)).expect("same disc");
    u0 = u0.scaled((rec.mass / mass(&u0)).sqrt());
    let opts = EvolveOptions {
        save_every,
        reference: Some(q.clone()),
        ..Default::default()
    };
    let traj = evolve_3d(&u0, rec.omega, t_final, dt, &opts)?;
    let distances: Vec<f64> = traj.diagnostics.iter().map(|d| d.orbital_distance.unwrap_or(0.0)).collect();
    Ok(StabilityReport {
        omega: rec.omega,
        epsilon,
        initial_distance: distances[0],
        max_distance: distances.iter().copied().fold(0.0, f64::max),
        times: traj.times.clone(),
        distances,
        mass_drift: traj.mass_drift(),
        energy_drift: traj.energy_drift(),
        max_sigma_y_sq: traj.diagnostics.iter().map(|d| d.sigma_y_sq).fold(0.0, f64::max),
    })
}

/// Fit of `err(t) <= C_1 / sqrt(omega) * exp(C_2 t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GronwallFit {
    pub c1: f64,
    pub c2: f64,
    pub fit: SlopeFit,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionSeries {
    pub omega: f64,
    pub times: Vec<f64>,
    /// `||u(t) - v(t) Phi_0||_{L^2}`.
    pub errors: Vec<f64>,
    pub gronwall: Option<GronwallFit>,
}

impl ReductionSeries {
    /// Error at the save point closest to `t`.
    pub fn error_at(&self, t: f64) -> f64 {
        let i = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.errors[i]
    }
}

/// Slope of `ln err` against `t` by least squares; `C_1` is the smallest
/// constant making `C_1 / sqrt(omega) exp(C_2 t)` an upper envelope of the
/// positive samples.
pub fn gronwall_fit(times: &[f64], errors: &[f64], omega: f64) -> Option<GronwallFit> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(errors)
        .filter(|(_, e)| **e > 0.0)
        .map(|(t, e)| (*t, e.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let (ts, ls): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
    let fit = linear_fit(&ts, &ls);
    let c2 = fit.slope;
    let offset = pts.iter().map(|(t, l)| l - c2 * t).fold(f64::NEG_INFINITY, f64::max);
    Some(GronwallFit {
        c1: offset.exp() * omega.sqrt(),
        c2,
        fit,
    })
}

/// Co-evolves `u0` under the 3D flow and `v0 = u0_par` under the 1D flow
/// and records `||u(t) - v(t) Phi_0||_{L^2}` at the save points.
pub fn cauchy_reduction_error(
    u0: &SpectralField3D,
    omega: f64,
    t_final: f64,
    dt: f64,
    opts: &EvolveOptions,
) -> Result<ReductionSeries, DynamicsError> {
    let disc = u0.discretization();
    let v0 = parallel_component(u0);
    let opts = EvolveOptions {
        keep_snapshots: true,
        reference: None,
        ..opts.clone()
    };
    let (a, b) = rayon::join(
        || evolve_3d(u0, omega, t_final, dt, &opts),
        || evolve_1d(&v0, t_final, dt, &opts),
    );
    let (tr3, tr1) = (a?, b?);
    let errors: Vec<f64> = tr3
        .snapshots
        .iter()
        .zip(&tr1.snapshots)
        .map(|(u, v)| mass(&u.sub(&embed_1d(disc, v)).expect("same disc")).sqrt())
        .collect();
    let gronwall = gronwall_fit(&tr3.times, &errors, omega);
    Ok(ReductionSeries {
        omega,
        times: tr3.times,
        errors,
        gronwall,
    })
}

/// Moving average over `window` samples followed by a running maximum.
pub fn smoothed_envelope(series: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    let mut out = Vec::with_capacity(series.len());
    let mut best = f64::NEG_INFINITY;
    for i in 0..series.len() {
        let lo = i.saturating_sub(w - 1);
        let avg = series[lo..=i].iter().sum::<f64>() / (i - lo + 1) as f64;
        best = best.max(avg);
        out.push(best);
    }
    out
}
