//! The one-dimensional limit problem: closed-form soliton, an independent
//! gradient-flow minimizer, and the Euler-Lagrange residual.
//!
//! Substituting `Q(z) = a sech(b z)` into `-Q'' - Q^3/(2 pi) = -mu Q` gives
//! `mu = b^2` and `a^2 = 4 pi mu`; the mass `int Q^2 = 8 pi b` then fixes
//! `mu = m^2 / (64 pi^2)`.

use std::f64::consts::PI;
use std::sync::Arc;

use log::warn;
use num_complex::Complex64;
use thiserror::Error;

use crate::basis::AxialGrid;
use crate::field::Field1D;

/// Relative boundary tail above which [`soliton`] warns.
pub const TAIL_WARN: f64 = 1e-7;
/// Relative boundary tail above which [`soliton`] refuses the grid.
pub const TAIL_MAX: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolitonError {
    #[error("mass must be positive and finite, got {0}")]
    BadMass(f64),
    #[error("axial domain too short: relative tail {tail:.3e} at the boundary exceeds {max:.0e}")]
    DomainTooShort { tail: f64, max: f64 },
    #[error("flow parameters must be positive (tau = {tau}, tol = {tol})")]
    BadFlow { tau: f64, tol: f64 },
    #[error("1D flow did not converge in {iterations} iterations (last increment {last_increment:.3e})")]
    NotConverged { iterations: usize, last_increment: f64 },
}

/// `mu_inf(m) = m^2 / (64 pi^2)`.
pub fn chemical_potential(mass: f64) -> f64 {
    mass * mass / (64.0 * PI * PI)
}

/// A 1D ground state, closed form or computed.
#[derive(Clone, Debug)]
pub struct Soliton1D {
    pub mass: f64,
    pub mu: f64,
    pub profile: Field1D,
    pub energy: f64,
    /// Flow iterations; 0 for the closed form.
    pub iterations: usize,
}

/// Closed-form ground state `sqrt(4 pi mu) sech(sqrt(mu) z)`.
pub fn soliton(mass: f64, grid: &Arc<AxialGrid>) -> Result<Soliton1D, SolitonError> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(SolitonError::BadMass(mass));
    }
    let mu = chemical_potential(mass);
    let width = mu.sqrt();
    let tail = 1.0 / (width * grid.half_length()).cosh();
    if tail > TAIL_MAX {
        return Err(SolitonError::DomainTooShort { tail, max: TAIL_MAX });
    }
    if tail > TAIL_WARN {
        warn!("soliton tail {tail:.2e} at z = L exceeds {TAIL_WARN:.0e}; periodic truncation visible");
    }
    let amp = (4.0 * PI * mu).sqrt();
    let profile = Field1D::from_real_fn(Arc::clone(grid), |z| amp / (width * z).cosh());
    let energy = profile.energy_1d();
    Ok(Soliton1D {
        mass,
        mu,
        profile,
        energy,
        iterations: 0,
    })
}

/// `|| -Q'' - Q^3/(2 pi) + mu Q ||_{L^2}`.
pub fn el_residual_1d(q: &Field1D, mu: f64) -> f64 {
    let d2 = q.second_derivative();
    let dz = q.grid().spacing();
    let sum: f64 = q
        .values()
        .iter()
        .zip(d2.values())
        .map(|(v, v2)| (-v2 - v * v.norm_sqr() / (2.0 * PI) + v * mu).norm_sqr())
        .sum();
    (sum * dz).sqrt()
}

/// Settings of the 1D normalized gradient flow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Flow1DConfig {
    pub tau: f64,
    /// Stop when `||v_{n+1} - v_n|| / tau` falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for Flow1DConfig {
    fn default() -> Self {
        Flow1DConfig {
            tau: 1e-2,
            tol: 1e-10,
            max_iter: 200_000,
        }
    }
}

/// Lagrange multiplier from pairing the 1D Euler-Lagrange equation with `v`.
pub fn pairing_multiplier_1d(v: &Field1D) -> f64 {
    (v.l4_norm_4() / (2.0 * PI) - v.dz_norm_sq()) / v.mass()
}

/// Minimizes `E_inf` at fixed mass by a normalized gradient flow: linear part
/// backward Euler (diagonal in Fourier space, shifted by the current
/// multiplier), cubic and multiplier terms explicit, mass renormalized each
/// step. Fixed points solve the discrete Euler-Lagrange equation exactly.
/// The iterate is kept real and even; the result is centered at `z = 0`.
pub fn solve_1d_ground_state(
    mass: f64,
    grid: &Arc<AxialGrid>,
    cfg: &Flow1DConfig,
    init: Option<&Field1D>,
) -> Result<Soliton1D, SolitonError> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(SolitonError::BadMass(mass));
    }
    if !(cfg.tau > 0.0 && cfg.tol > 0.0) {
        return Err(SolitonError::BadFlow {
            tau: cfg.tau,
            tol: cfg.tol,
        });
    }
    let n = grid.point_count();
    let xi = grid.wavenumbers();
    let mut v = match init {
        Some(f) => f.clone(),
        None => Field1D::from_real_fn(Arc::clone(grid), |z| (-0.5 * z * z).exp()),
    };
    symmetrize_even(&mut v);
    v = v.scaled((mass / v.mass()).sqrt());

    let mut last_increment = f64::INFINITY;
    for iter in 1..=cfg.max_iter {
        let mu = pairing_multiplier_1d(&v);
        let shift = mu.max(0.0);
        let mut rhs: Vec<Complex64> = v
            .values()
            .iter()
            .map(|x| x + cfg.tau * (x * x.norm_sqr() / (2.0 * PI) + x * (shift - mu)))
            .collect();
        grid.forward_in_place(&mut rhs);
        for (c, k) in rhs.iter_mut().zip(xi) {
            *c /= 1.0 + cfg.tau * (k * k + shift);
        }
        grid.inverse_in_place(&mut rhs);
        let mut next = Field1D::new(Arc::clone(grid), rhs).expect("grid-sized");
        symmetrize_even(&mut next);
        next = next.scaled((mass / next.mass()).sqrt());

        let diff = next.sub(&v);
        last_increment = diff.mass().sqrt() / cfg.tau;
        v = next;
        if last_increment < cfg.tol {
            let mu = pairing_multiplier_1d(&v);
            let energy = v.energy_1d();
            return Ok(Soliton1D {
                mass,
                mu,
                profile: v,
                energy,
                iterations: iter,
            });
        }
        debug_assert_eq!(v.values().len(), n);
    }
    Err(SolitonError::NotConverged {
        iterations: cfg.max_iter,
        last_increment,
    })
}

/// `v(z) <- (Re v(z) + Re v(-z)) / 2` on the symmetric grid.
fn symmetrize_even(v: &mut Field1D) {
    let n = v.values().len();
    let vals = v.values_mut();
    // node j sits at -L + j dz, its mirror at index (N - j) mod N
    for j in 0..=n / 2 {
        let m = (n - j) % n;
        let avg = 0.5 * (vals[j].re + vals[m].re);
        vals[j] = Complex64::new(avg, 0.0);
        vals[m] = Complex64::new(avg, 0.0);
    }
}
