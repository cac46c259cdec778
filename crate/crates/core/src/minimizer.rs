//! Constrained ground states `Q_omega` by normalized gradient flow, together
//! with the Lagrange multiplier and the identity diagnostics.

use std::sync::Arc;

use log::warn;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::align::center_and_fix_sign;
use crate::basis::Discretization;
use crate::field::{cubic_term, embed_1d, inner, mass, Norms, SpectralField3D};
use crate::soliton::soliton;

/// Default Gagliardo-Nirenberg constant used for the advisory thresholds.
pub const DEFAULT_C_GN: f64 = 4.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MinimizeError {
    #[error("omega and mass must be positive and finite (omega = {omega}, m = {mass})")]
    BadParameters { omega: f64, mass: f64 },
    #[error("initial field has zero mass")]
    ZeroInit,
    #[error("initial field lives on a different discretization")]
    Incompatible,
    #[error("constraint breach at iteration {iteration}: ||u||_Sigma_y^2 = {sigma_y_sq:.6e} > sqrt(omega) = {bound:.6e}")]
    ConstraintBreach {
        iteration: usize,
        sigma_y_sq: f64,
        bound: f64,
    },
    #[error("flow did not converge in {iterations} iterations (increment {increment:.3e}, EL residual {residual:.3e})")]
    NotConverged {
        iterations: usize,
        increment: f64,
        residual: f64,
        /// `(iteration, relative EL residual)` sampled along the flow.
        history: Vec<(usize, f64)>,
    },
    #[error("non-finite iterate at iteration {0}")]
    NonFinite(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowConfig {
    pub tau: f64,
    /// Bound on `||u_{n+1} - u_n|| / tau`.
    pub tol_increment: f64,
    /// Bound on the EL residual relative to [`el_scale`].
    pub tol_residual: f64,
    pub max_iter: usize,
    /// Keep the iterate real and even in `z`.
    pub enforce_even: bool,
    pub c_gn: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            tau: 0.5,
            tol_increment: 1e-10,
            tol_residual: 1e-8,
            max_iter: 20_000,
            enforce_even: true,
            c_gn: DEFAULT_C_GN,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroundStateRecord {
    pub omega: f64,
    pub mass: f64,
    pub state: SpectralField3D,
    pub mu: f64,
    pub energy: f64,
    pub residual_el: f64,
    pub sigma_y_sq: f64,
    pub pohozaev_res: (f64, f64),
    pub iterations: usize,
    /// Largest per-step energy increase seen along the flow.
    pub max_energy_increase: f64,
    /// Multiplier extracted from the flow's preconditioned pairing.
    pub mu_flow: f64,
}

impl GroundStateRecord {
    pub fn norms(&self) -> Norms {
        Norms::of(&self.state)
    }

    /// `C^2 m^3 / (2 omega)`.
    pub fn forbidden_bound(&self, c_gn: f64) -> f64 {
        forbidden_region_bound(self.mass, self.omega, c_gn)
    }
}

/// `C^4 m^2`.
pub fn admissibility_threshold(mass: f64, c_gn: f64) -> f64 {
    c_gn.powi(4) * mass * mass
}

/// `C^2 m^3 / (2 omega)`.
pub fn forbidden_region_bound(mass: f64, omega: f64, c_gn: f64) -> f64 {
    c_gn * c_gn * mass.powi(3) / (2.0 * omega)
}

fn multiplier_from(n: &Norms, omega: f64) -> f64 {
    (n.l4_4 - omega * n.sigma_y_sq - n.dz_sq) / n.mass
}

/// `mu = (||Q||_4^4 - omega ||Q||_Sigma_y^2 - ||d_z Q||^2) / m`.
pub fn lagrange_multiplier(q: &SpectralField3D, omega: f64, mass: f64) -> f64 {
    let n = Norms::of(q);
    (n.l4_4 - omega * n.sigma_y_sq - n.dz_sq) / mass
}

/// Pairings of the EL equation with `Q` and with the axial dilation
/// generator; both vanish on critical points.
pub fn pohozaev_residuals(q: &SpectralField3D, mu: f64, omega: f64) -> (f64, f64) {
    pohozaev_from_norms(&Norms::of(q), mu, omega)
}

fn pohozaev_from_norms(n: &Norms, mu: f64, omega: f64) -> (f64, f64) {
    let res1 = omega * n.sigma_y_sq + n.dz_sq - n.l4_4 + mu * n.mass;
    let res2 = -0.5 * omega * n.sigma_y_sq + 0.5 * n.dz_sq + 0.25 * n.l4_4 - 0.5 * mu * n.mass;
    (res1, res2)
}

/// Size of the terms entering the Pohozaev residuals.
pub fn pohozaev_scale(n: &Norms, mu: f64, omega: f64) -> f64 {
    n.l4_4 + n.dz_sq + omega * n.sigma_y_sq + mu.abs() * n.mass
}

/// `E - (-mu m / 6 + omega ||Q||_Sigma_y^2 / 3)`.
///
/// Eliminating `||d_z Q||^2` and `||Q||_4^4` between the two Pohozaev
/// relations leaves this combination; it vanishes at every critical point.
pub fn energy_identity_check(rec: &GroundStateRecord) -> f64 {
    rec.energy - (-rec.mu * rec.mass / 6.0 + rec.omega * rec.sigma_y_sq / 3.0)
}

/// `omega (H_y - 2) Q - d_z^2 Q - P(Q^3) + mu Q` in coefficients.
pub fn el_operator(q: &SpectralField3D, omega: f64, mu: f64) -> SpectralField3D {
    let sym = q.discretization().linear_symbol(omega);
    let nl = cubic_term(q);
    let coeffs: Vec<Complex64> = q
        .coeffs()
        .iter()
        .zip(nl.coeffs())
        .zip(&sym)
        .map(|((c, n), a)| c * (a + mu) - n)
        .collect();
    SpectralField3D::from_coeffs(q.discretization(), coeffs, q.is_real()).expect("same shape")
}

/// `||omega (H_y - 2) Q - d_z^2 Q - Q^3 + mu Q||_{L^2}` with the cubic term
/// projected onto the discrete space.
pub fn el_residual(q: &SpectralField3D, omega: f64, mu: f64) -> f64 {
    mass(&el_operator(q, omega, mu)).sqrt()
}

/// `||P(Q^3)|| + |mu| ||Q||`, the size of the terms balanced by the EL
/// equation.
pub fn el_scale(q: &SpectralField3D, mu: f64) -> f64 {
    mass(&cubic_term(q)).sqrt() + mu.abs() * mass(q).sqrt()
}

/// `Phi_0(y) Q_inf(z)` at mass `m`, renormalized on the grid.
pub fn default_init(disc: &Arc<Discretization>, m: f64) -> SpectralField3D {
    let grid = disc.grid_handle();
    let mu = crate::soliton::chemical_potential(m);
    let profile = match soliton(m, &grid) {
        Ok(s) => s.profile,
        Err(_) => {
            let amp = (4.0 * std::f64::consts::PI * mu).sqrt();
            crate::field::Field1D::from_real_fn(grid, |z| amp / (mu.sqrt() * z).cosh())
        }
    };
    let u = embed_1d(disc, &profile);
    let scale = (m / mass(&u)).sqrt();
    u.scaled(scale)
}

/// Normalized gradient flow for `min E_omega` at fixed mass.
///
/// Each step solves
/// `(1 + tau (A + s)) u* = u + tau (P(|u|^2 u) + (s - mu_n) u)` with
/// `A = omega (Lambda_k - 2) + xi^2`, `mu_n` the pairing multiplier of the
/// current iterate and `s = max(mu_n, 0)`, then rescales `u*` to mass `m`.
/// A fixed point satisfies the discrete EL equation with multiplier `mu_n`.
pub fn minimize(
    disc: &Arc<Discretization>,
    omega: f64,
    m: f64,
    cfg: &FlowConfig,
    init: Option<&SpectralField3D>,
) -> Result<GroundStateRecord, MinimizeError> {
    if !(omega > 0.0 && omega.is_finite() && m > 0.0 && m.is_finite()) {
        return Err(MinimizeError::BadParameters { omega, mass: m });
    }
    let threshold = admissibility_threshold(m, cfg.c_gn);
    if omega < threshold {
        warn!("omega = {omega} below the admissibility threshold {threshold:.3e}; proceeding");
    }
    let mut u = match init {
        Some(f) => {
            if **f.discretization() != **disc {
                return Err(MinimizeError::Incompatible);
            }
            f.clone()
        }
        None => default_init(disc, m),
    };
    if cfg.enforce_even {
        u.enforce_even();
    } else {
        u.enforce_real();
    }
    let m0 = mass(&u);
    if !(m0 > 0.0) {
        return Err(MinimizeError::ZeroInit);
    }
    u = u.scaled((m / m0).sqrt());

    let sym = disc.linear_symbol(omega);
    let bound = omega.sqrt();
    let mut norms = Norms::of(&u);
    let mut energy = norms.energy(omega);
    let mut max_increase = f64::NEG_INFINITY;
    let mut history = Vec::new();
    let mut increment = f64::INFINITY;
    let mut residual = f64::INFINITY;

    for iter in 1..=cfg.max_iter {
        let mu = multiplier_from(&norms, omega);
        let shift = mu.max(0.0);
        let nl = cubic_term(&u);
        let coeffs: Vec<Complex64> = u
            .coeffs()
            .iter()
            .zip(nl.coeffs())
            .zip(&sym)
            .map(|((c, n), a)| (c + cfg.tau * (n + c * (shift - mu))) / (1.0 + cfg.tau * (a + shift)))
            .collect();
        let mut next = SpectralField3D::from_coeffs(disc, coeffs, true).expect("same shape");
        if cfg.enforce_even {
            next.enforce_even();
        } else {
            next.enforce_real();
        }
        let mn = mass(&next);
        if !(mn.is_finite() && mn > 0.0) {
            return Err(MinimizeError::NonFinite(iter));
        }
        next = next.scaled((m / mn).sqrt());

        increment = mass(&next.sub(&u).expect("same disc")).sqrt() / cfg.tau;
        u = next;
        norms = Norms::of(&u);
        if norms.sigma_y_sq > bound {
            return Err(MinimizeError::ConstraintBreach {
                iteration: iter,
                sigma_y_sq: norms.sigma_y_sq,
                bound,
            });
        }
        let e = norms.energy(omega);
        max_increase = max_increase.max(e - energy);
        energy = e;

        if increment < cfg.tol_increment || iter % 50 == 0 {
            let mu = multiplier_from(&norms, omega);
            residual = el_residual(&u, omega, mu) / el_scale(&u, mu);
            if iter % 50 == 0 {
                history.push((iter, residual));
            }
            if increment < cfg.tol_increment && residual < cfg.tol_residual {
                return Ok(finish(u, omega, m, iter, max_increase, cfg));
            }
        }
    }
    Err(MinimizeError::NotConverged {
        iterations: cfg.max_iter,
        increment,
        residual,
        history,
    })
}

fn finish(
    u: SpectralField3D,
    omega: f64,
    m: f64,
    iterations: usize,
    max_energy_increase: f64,
    cfg: &FlowConfig,
) -> GroundStateRecord {
    let mut state = center_and_fix_sign(&u);
    if cfg.enforce_even {
        state.enforce_even();
    }
    let norms = Norms::of(&state);
    let mu = multiplier_from(&norms, omega);
    if mu < 0.0 {
        warn!("negative multiplier mu = {mu:.3e} at omega = {omega}: not in the asymptotic regime");
    }
    let residual_el = el_residual(&state, omega, mu);
    let mu_flow = preconditioned_multiplier(&state, omega, cfg.tau);
    GroundStateRecord {
        omega,
        mass: m,
        mu,
        energy: norms.energy(omega),
        residual_el,
        sigma_y_sq: norms.sigma_y_sq,
        pohozaev_res: pohozaev_from_norms(&norms, mu, omega),
        iterations,
        max_energy_increase: max_energy_increase.max(0.0),
        mu_flow,
        state,
    }
}

/// Multiplier from pairing the EL equation with `(1 + tau A)^{-1} Q` instead
/// of `Q`; agrees with [`lagrange_multiplier`] only at critical points.
pub fn preconditioned_multiplier(q: &SpectralField3D, omega: f64, tau: f64) -> f64 {
    let disc = q.discretization();
    let sym = disc.linear_symbol(omega);
    let coeffs: Vec<Complex64> = q.coeffs().iter().zip(&sym).map(|(c, a)| c / (1.0 + tau * a)).collect();
    let w = SpectralField3D::from_coeffs(disc, coeffs, q.is_real()).expect("same shape");
    let aq: Vec<Complex64> = q.coeffs().iter().zip(&sym).map(|(c, a)| c * a).collect();
    let aq = SpectralField3D::from_coeffs(disc, aq, q.is_real()).expect("same shape");
    let nl = cubic_term(q);
    ((inner(&nl, &w) - inner(&aq, &w)) / inner(q, &w)).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::GridParams;
    use crate::field::Field1D;
    use std::f64::consts::PI;

    fn disc() -> Arc<Discretization> {
        Discretization::new(GridParams::new(4, 16.0, 256)).unwrap()
    }

    fn soliton_product(d: &Arc<Discretization>) -> SpectralField3D {
        let f = Field1D::from_real_fn(d.grid_handle(), |z| 2.0 * PI.sqrt() / z.cosh());
        embed_1d(d, &f)
    }

    #[test]
    fn multiplier_of_trial_state() {
        let d = disc();
        let q = soliton_product(&d);
        for omega in [1.0, 64.0, 1e4] {
            assert!((lagrange_multiplier(&q, omega, 8.0 * PI) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn linear_dominated_mode_has_negative_multiplier() {
        let d = disc();
        let mut c = vec![Complex64::new(0.0, 0.0); d.len()];
        c[d.points() + 3] = Complex64::new(1e-3, 0.0);
        let u = SpectralField3D::from_coeffs(&d, c, false).unwrap();
        assert!(lagrange_multiplier(&u, 10.0, mass(&u)) < 0.0);
    }

    #[test]
    fn pohozaev_on_trial_state() {
        let d = disc();
        let q = soliton_product(&d);
        let (r1, r2) = pohozaev_residuals(&q, 1.0, 512.0);
        assert!(r1.abs() < 1e-8 && r2.abs() < 1e-8, "{r1} {r2}");
        assert_eq!(pohozaev_residuals(&SpectralField3D::zeros(&d), 0.3, 9.0), (0.0, 0.0));
    }

    #[test]
    fn thresholds() {
        assert!((admissibility_threshold(8.0 * PI, 4.0) - 256.0 * 64.0 * PI * PI).abs() < 1e-6);
        assert!((admissibility_threshold(8.0 * PI, 4.0) - 161_703.6).abs() < 0.1);
        assert_eq!(admissibility_threshold(0.0, 4.0), 0.0);
        assert_eq!(admissibility_threshold(1.0, 2.0), 16.0);
        assert!((forbidden_region_bound(2.0, 4.0, 4.0) - 16.0).abs() < 1e-14);
    }

    #[test]
    fn energy_identity_trivial_cases() {
        let d = disc();
        let rec = GroundStateRecord {
            omega: 3.0,
            mass: 0.0,
            state: SpectralField3D::zeros(&d),
            mu: 0.0,
            energy: 0.0,
            residual_el: 0.0,
            sigma_y_sq: 0.0,
            pohozaev_res: (0.0, 0.0),
            iterations: 0,
            max_energy_increase: 0.0,
            mu_flow: 0.0,
        };
        assert_eq!(energy_identity_check(&rec), 0.0);
        let sol = GroundStateRecord {
            mass: 8.0 * PI,
            mu: 1.0,
            energy: -4.0 * PI / 3.0,
            ..rec
        };
        assert!(energy_identity_check(&sol).abs() < 1e-14);
    }

    #[test]
    fn converges_at_moderate_omega() {
        let d = disc();
        let rec = minimize(&d, 256.0, 8.0 * PI, &FlowConfig::default(), None).unwrap();
        assert!((mass(&rec.state) - 8.0 * PI).abs() < 1e-9 * 8.0 * PI);
        assert!(rec.energy <= -4.0 * PI / 3.0 + 1e-9);
        assert!(rec.mu > 0.0);
        assert!(rec.max_energy_increase < 1e-12, "{}", rec.max_energy_increase);
        assert!((rec.mu - rec.mu_flow).abs() < 1e-6);
        assert!(energy_identity_check(&rec).abs() < 1e-6 * rec.energy.abs());
    }

    #[test]
    fn rejects_bad_input() {
        let d = disc();
        let cfg = FlowConfig::default();
        assert!(matches!(minimize(&d, -1.0, 1.0, &cfg, None), Err(MinimizeError::BadParameters { .. })));
        let z = SpectralField3D::zeros(&d);
        assert_eq!(minimize(&d, 10.0, 1.0, &cfg, Some(&z)).unwrap_err(), MinimizeError::ZeroInit);
    }
}
