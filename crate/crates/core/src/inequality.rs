//! Anisotropic Gagliardo-Nirenberg ratio, the spectral interpolation
//! inequality and the fixed-seed field corpus both are checked on.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::basis::Discretization;
use crate::field::{
    dz, embed_1d, l4_norm_4, mass, project_p0, project_p1, sigma_y_norm_sq, Field1D,
    SpectralField3D,
};

/// Seed of the standard corpus.
pub const CORPUS_SEED: u64 = 0x5eed_c0de;

/// Number of random fields in the standard corpus.
pub const CORPUS_SIZE: usize = 200;

/// Conservative constant the GN ratio is checked against.
pub const GN_CHECK_CONSTANT: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InequalityError {
    #[error("inequality vacuous: denominator vanishes")]
    Vacuous,
    #[error("interpolation exponent not admissible: k = {k}, theta = {theta}")]
    BadExponent { k: u32, theta: f64 },
}

/// `||u||_4^4 / (||P0 u||^3 ||P0 d_z u|| + ||P1 u|| ||P1 d_z u|| ||P1 u||_{Sigma_y}^2)`.
pub fn gn_ratio(u: &SpectralField3D) -> Result<f64, InequalityError> {
    let p0 = project_p0(u);
    let p1 = project_p1(u);
    let du = dz(u);
    let denom = mass(&p0).powf(1.5) * mass(&project_p0(&du)).sqrt()
        + mass(&p1).sqrt() * mass(&project_p1(&du)).sqrt() * sigma_y_norm_sq(&p1);
    if !(denom > 0.0) {
        return Err(InequalityError::Vacuous);
    }
    Ok(l4_norm_4(u) / denom)
}

/// Both sides of `||A^k u|| <= ||u||^(1-theta) ||A^(k/theta) u||^theta` with
/// `A = H_y - d_z^2`, evaluated as spectral multipliers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interpolation {
    pub lhs: f64,
    pub rhs: f64,
}

impl Interpolation {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= self.rhs * (1.0 + slack)
    }
}

pub fn interpolation_check(u: &SpectralField3D, k: u32, theta: f64) -> Result<Interpolation, InequalityError> {
    let ratio = k as f64 / theta;
    if k == 0 || !(theta > 0.0 && theta < 1.0) || (ratio - ratio.round()).abs() > 1e-9 {
        return Err(InequalityError::BadExponent { k, theta });
    }
    let high = ratio.round() as i32;
    let disc = u.discretization();
    let nz = disc.points();
    let xi = disc.grid().wavenumbers();
    let basis = disc.basis();
    let mut low = 0.0;
    let mut mid = 0.0;
    let mut top = 0.0;
    for (i, c) in u.coeffs().iter().enumerate() {
        let sym = basis.eigenvalue(i / nz) + xi[i % nz].powi(2);
        let a = c.norm_sqr();
        low += a;
        mid += sym.powi(2 * k as i32) * a;
        top += sym.powi(2 * high) * a;
    }
    let measure = disc.grid().measure();
    let lhs = (mid * measure).sqrt();
    let rhs = (low * measure).sqrt().powf(1.0 - theta) * (top * measure).sqrt().powf(theta);
    Ok(Interpolation { lhs, rhs })
}

/// Fixed-seed corpus: `count` random smooth band-limited fields followed by
/// the lowest-mode soliton family `Phi_0 sech` at a few masses.
pub fn standard_corpus(disc: &Arc<Discretization>, seed: u64, count: usize) -> Vec<SpectralField3D> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nz = disc.points();
    let kk = disc.modes();
    let xi = disc.grid().wavenumbers();
    let mut out = Vec::with_capacity(count + 4);
    for _ in 0..count {
        let width: f64 = rng.random_range(0.5..3.0);
        let k_active = rng.random_range(1..=kk.min(6));
        let transverse_decay: f64 = rng.random_range(0.2..1.0);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); disc.len()];
        for k in 0..k_active {
            let amp_k = transverse_decay.powi(k as i32);
            for n in 0..nz {
                let envelope = (-(xi[n] * width).powi(2) / 2.0).exp();
                if envelope < 1e-14 {
                    continue;
                }
                let re: f64 = rng.random_range(-1.0..1.0);
                let im: f64 = rng.random_range(-1.0..1.0);
                coeffs[k * nz + n] = Complex64::new(re, im) * envelope * amp_k;
            }
        }
        let mut u = SpectralField3D::from_coeffs(disc, coeffs, false).expect("sized by disc");
        let target: f64 = rng.random_range(1.0..30.0);
        let m = mass(&u);
        if m > 0.0 {
            u = u.scaled((target / m).sqrt());
        }
        out.push(u);
    }
    for m in [2.0, 8.0 * PI, 40.0] {
        let mu = m * m / (64.0 * PI * PI);
        let amp = (4.0 * PI * mu).sqrt();
        let f = Field1D::from_real_fn(disc.grid_handle(), |z| amp / (mu.sqrt() * z).cosh());
        out.push(embed_1d(disc, &f));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::GridParams;

    fn disc() -> Arc<Discretization> {
        Discretization::new(GridParams::new(6, 16.0, 128)).unwrap()
    }

    #[test]
    fn soliton_ratio_closed_form() {
        let d = disc();
        let f = Field1D::from_real_fn(d.grid_handle(), |z| 2.0 * PI.sqrt() / z.cosh());
        let u = embed_1d(&d, &f);
        let expect = 3.0_f64.sqrt() / (6.0 * PI);
        let r = gn_ratio(&u).unwrap();
        assert!((r - expect).abs() < 1e-9, "{r} vs {expect}");
        assert!((r - 0.09189).abs() < 1e-5);
        assert!((gn_ratio(&u.scaled(3.7)).unwrap() - r).abs() < 1e-12);
    }

    #[test]
    fn constant_field_is_vacuous() {
        let d = disc();
        let mut c = vec![Complex64::new(0.0, 0.0); d.len()];
        c[0] = Complex64::new(1.0, 0.0);
        let u = SpectralField3D::from_coeffs(&d, c, true).unwrap();
        assert_eq!(gn_ratio(&u), Err(InequalityError::Vacuous));
        assert_eq!(gn_ratio(&SpectralField3D::zeros(&d)), Err(InequalityError::Vacuous));
    }

    #[test]
    fn interpolation_single_mode_is_equality() {
        let d = disc();
        let mut c = vec![Complex64::new(0.0, 0.0); d.len()];
        c[2 * d.points() + 5] = Complex64::new(0.3, -0.4);
        let u = SpectralField3D::from_coeffs(&d, c, false).unwrap();
        let r = interpolation_check(&u, 1, 0.5).unwrap();
        assert!((r.lhs - r.rhs).abs() <= 1e-12 * r.rhs);
        let z = interpolation_check(&SpectralField3D::zeros(&d), 1, 0.5).unwrap();
        assert_eq!((z.lhs, z.rhs), (0.0, 0.0));
        assert!(z.holds(1e-10));
    }

    #[test]
    fn interpolation_rejects_bad_theta() {
        let d = disc();
        let u = SpectralField3D::zeros(&d);
        assert!(interpolation_check(&u, 1, 0.4).is_err());
        assert!(interpolation_check(&u, 1, 1.0).is_err());
        assert!(interpolation_check(&u, 0, 0.5).is_err());
    }

    #[test]
    fn corpus_is_reproducible() {
        let d = disc();
        let a = standard_corpus(&d, CORPUS_SEED, 5);
        let b = standard_corpus(&d, CORPUS_SEED, 5);
        assert_eq!(a, b);
        assert_eq!(a.len(), 8);
    }
}
