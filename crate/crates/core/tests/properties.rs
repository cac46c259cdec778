use std::sync::Arc;

use cigar_core::field::{mass, project_p0, project_p1, sigma_y_norm_sq, SpectralField3D};
use cigar_core::linearized::random_starts;
use cigar_core::minimizer::{minimize, FlowConfig};
use cigar_core::{Discretization, GridParams};
use num_complex::Complex64;
use proptest::prelude::*;

fn small() -> Arc<Discretization> {
    Discretization::new(GridParams::new(5, 8.0, 32)).unwrap()
}

fn field(disc: &Arc<Discretization>, parts: &[(f64, f64)]) -> SpectralField3D {
    let nz = disc.points();
    // damp high axial indices so the field is smooth
    let coeffs: Vec<Complex64> = parts
        .iter()
        .enumerate()
        .map(|(i, (a, b))| {
            let n = i % nz;
            let d = n.min(nz - n) as f64;
            Complex64::new(*a, *b) * (-0.2 * d).exp()
        })
        .collect();
    SpectralField3D::from_coeffs(disc, coeffs, false).unwrap()
}

fn parts() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 5 * 32)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spectral_physical_round_trip(p in parts()) {
        let d = small();
        let u = field(&d, &p);
        let back = SpectralField3D::from_physical(&d, &u.to_physical(), false).unwrap();
        let err = back.sub(&u).unwrap().max_abs_coeff();
        prop_assert!(err < 1e-12, "{}", err);
    }

    #[test]
    fn mass_is_homogeneous_and_splits_over_projections(p in parts(), c in -5.0f64..5.0) {
        let d = small();
        let u = field(&d, &p);
        let m = mass(&u);
        prop_assert!((mass(&u.scaled(c)) - c * c * m).abs() <= 1e-12 * (1.0 + c * c * m));
        let split = mass(&project_p0(&u)) + mass(&project_p1(&u));
        prop_assert!((split - m).abs() <= 1e-12 * (1.0 + m));
    }

    #[test]
    fn transverse_gap_on_excited_modes(p in parts()) {
        let d = small();
        let p1 = project_p1(&field(&d, &p));
        prop_assert!(sigma_y_norm_sq(&p1) >= 4.0 * mass(&p1) * (1.0 - 1e-12));
        prop_assert_eq!(sigma_y_norm_sq(&project_p0(&field(&d, &p))), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn flow_energy_never_increases(seed in 0u64..1000) {
        let d = Discretization::new(GridParams::new(6, 16.0, 128)).unwrap();
        let m = 8.0 * std::f64::consts::PI;
        let init = random_starts(&d, m, 1, seed).remove(0);
        let cfg = FlowConfig { enforce_even: false, ..FlowConfig::default() };
        let rec = minimize(&d, 256.0, m, &cfg, Some(&init)).unwrap();
        prop_assert!(rec.max_energy_increase <= 1e-12, "{}", rec.max_energy_increase);
        prop_assert!((mass(&rec.state) - m).abs() <= 1e-9 * m);
    }
}
