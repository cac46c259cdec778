use std::f64::consts::PI;
use std::sync::Arc;

use cigar_core::basis::build_axial_grid;
use cigar_core::soliton::{chemical_potential, el_residual_1d, soliton};
use proptest::prelude::*;

/// RK4 for the scaled profile equation `R'' = R - R^3 / (2 pi)`, `R(0) = a`,
/// `R'(0) = 0`. Returns `(mass up to z_max, sign of the failure mode)`: `-1`
/// when `R` crosses zero (a too large), `+1` when it turns back up.
fn shoot(a: f64, z_max: f64, h: f64) -> (f64, i32) {
    let f = |r: f64, p: f64| (p, r - r * r * r / (2.0 * PI));
    let (mut r, mut p) = (a, 0.0);
    let mut mass = 0.0;
    let steps = (z_max / h) as usize;
    for _ in 0..steps {
        let r0 = r;
        let (k1r, k1p) = f(r, p);
        let (k2r, k2p) = f(r + 0.5 * h * k1r, p + 0.5 * h * k1p);
        let (k3r, k3p) = f(r + 0.5 * h * k2r, p + 0.5 * h * k2p);
        let (k4r, k4p) = f(r + h * k3r, p + h * k3p);
        r += h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        mass += 0.5 * h * (r0 * r0 + r * r);
        if r < 0.0 {
            return (2.0 * mass, -1);
        }
        if p > 0.0 {
            return (2.0 * mass, 1);
        }
    }
    (2.0 * mass, 0)
}

/// Bisection on the shooting amplitude; returns `(a*, mass of R)`.
fn shooting_profile() -> (f64, f64) {
    let (mut lo, mut hi) = (2.0, 5.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        match shoot(mid, 40.0, 1e-3).1 {
            -1 => hi = mid,
            _ => lo = mid,
        }
    }
    let a = 0.5 * (lo + hi);
    // the shot leaves the separatrix near z ~ 18; the tail beyond 12 is < 1e-9
    (a, shoot(a, 12.0, 1e-3).0)
}

#[test]
fn shooting_oracle_small_mass() {
    let (a, m_r) = shooting_profile();
    // Q(z) = sqrt(mu) R(sqrt(mu) z) has mass sqrt(mu) m_R
    let mu = (1.0 / m_r).powi(2);
    let mu_closed = chemical_potential(1.0);
    assert!((mu - mu_closed).abs() < 1e-6 * mu_closed, "{mu} {mu_closed}");
    assert!((mu_closed - 1.58314e-3).abs() < 1e-8);

    let grid = Arc::new(build_axial_grid(480.0, 8192).unwrap());
    let s = soliton(1.0, &grid).unwrap();
    let peak = s.profile.values()[grid.center_index()].re;
    assert!((peak - mu.sqrt() * a).abs() < 1e-6 * peak, "{peak} {}", mu.sqrt() * a);
    assert!(el_residual_1d(&s.profile, s.mu) < 1e-8);
}

#[test]
fn pohozaev_identities_1d() {
    let grid = Arc::new(build_axial_grid(32.0, 512).unwrap());
    let s = soliton(8.0 * PI, &grid).unwrap();
    let q = &s.profile;
    let (d, l4, m) = (q.dz_norm_sq(), q.l4_norm_4(), q.mass());
    assert!((d + s.mu * m - l4 / (2.0 * PI)).abs() < 1e-8);
    assert!((0.5 * d + 0.25 * l4 / (2.0 * PI) - 0.5 * s.mu * m).abs() < 1e-8);
}

#[test]
fn residual_tracks_multiplier_shift() {
    let grid = Arc::new(build_axial_grid(32.0, 512).unwrap());
    let s = soliton(8.0 * PI, &grid).unwrap();
    let r = el_residual_1d(&s.profile, s.mu + 0.1);
    assert!((r - 0.1 * (8.0 * PI).sqrt()).abs() < 1e-8, "{r}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn multiplier_scales_quadratically(m in 0.1f64..100.0, lambda in 0.1f64..10.0) {
        let lhs = chemical_potential(lambda * m);
        let rhs = lambda * lambda * chemical_potential(m);
        prop_assert!((lhs - rhs).abs() <= 1e-14 * rhs);
    }

    #[test]
    fn closed_form_invariants(m in 8.0f64..60.0) {
        let grid = Arc::new(build_axial_grid(64.0, 2048).unwrap());
        let s = soliton(m, &grid).unwrap();
        prop_assert!((s.mu - m * m / (64.0 * PI * PI)).abs() <= 1e-10 * s.mu);
        prop_assert!((s.profile.mass() - m).abs() <= 1e-9 * m);
        prop_assert!(s.energy < 0.0);
        prop_assert!((s.energy + s.mu * m / 6.0).abs() <= 1e-9 * s.energy.abs());
    }
}
