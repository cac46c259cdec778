use cigar_cli::state_file::{decode, encode, StateMeta};
use cigar_core::{Discretization, GridParams, SpectralField3D};
use num_complex::Complex64;
use proptest::prelude::*;

fn meta(time: f64) -> StateMeta {
    StateMeta {
        kind: "snapshot".into(),
        omega: 512.0,
        mass: 1.5,
        mu: 0.25,
        energy: -0.125,
        time,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn complex_fields_round_trip_bit_exactly(
        re in prop::collection::vec(-1e3f64..1e3, 3 * 16),
        im in prop::collection::vec(-1e3f64..1e3, 3 * 16),
        time in 0.0f64..10.0,
    ) {
        let d = Discretization::new(GridParams::new(3, 4.0, 16)).unwrap();
        let c: Vec<Complex64> = re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect();
        let u = SpectralField3D::from_coeffs(&d, c, false).unwrap();
        let (h, back) = decode(&encode(&u, &meta(time))).unwrap();
        prop_assert_eq!(h.time.to_bits(), time.to_bits());
        prop_assert_eq!(back.coeffs(), u.coeffs());
        prop_assert!(!back.is_real());
    }

    #[test]
    fn real_layout_round_trips(re in prop::collection::vec(-1.0f64..1.0, 2 * 8)) {
        let d = Discretization::new(GridParams::new(2, 4.0, 8)).unwrap();
        let c: Vec<Complex64> = re.iter().map(|a| Complex64::new(*a, 0.0)).collect();
        let u = SpectralField3D::from_coeffs(&d, c, true).unwrap();
        let bytes = encode(&u, &meta(0.0));
        let (_, back) = decode(&bytes).unwrap();
        prop_assert_eq!(back.coeffs(), u.coeffs());
        prop_assert!(back.is_real());
    }
}
