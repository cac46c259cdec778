use std::f64::consts::PI;

use cigar_core::dynamics::{evolve_3d, orbital_distance, EvolveOptions};
use cigar_core::linearized::linearized_identity_defect;
use cigar_core::minimizer::{energy_identity_check, minimize, FlowConfig};
use cigar_core::{Discretization, GridParams};

#[test]
fn multiplier_routes_agree_at_high_omega() {
    let d = Discretization::new(GridParams::new(12, 16.0, 256)).unwrap();
    let rec = minimize(&d, 1024.0, 8.0 * PI, &FlowConfig::default(), None).unwrap();
    assert!((rec.mu - rec.mu_flow).abs() < 1e-6, "{} {}", rec.mu, rec.mu_flow);
    assert!(energy_identity_check(&rec).abs() < 1e-6 * rec.energy.abs());
    // L Q = -2 P(Q^3) holds up to the Euler-Lagrange residual
    assert!(linearized_identity_defect(&rec) < 1e-8);
}

#[test]
fn standing_wave_stays_put() {
    let d = Discretization::new(GridParams::new(12, 16.0, 256)).unwrap();
    let rec = minimize(&d, 256.0, 8.0 * PI, &FlowConfig::default(), None).unwrap();
    let opts = EvolveOptions {
        save_every: 400,
        reference: Some(rec.state.clone()),
        ..Default::default()
    };
    let traj = evolve_3d(&rec.state, 256.0, 1.0, 2.5e-4, &opts).unwrap();
    let worst = traj.max_orbital_distance().unwrap();
    assert!(worst < 1e-6, "{worst}");
    assert!(orbital_distance(&traj.final_state, &rec.state) < 1e-6);
}
