use proptest::prelude::*;

use jacobi_spectral::schrodinger::schrodinger_evolution;
use jacobi_spectral::{Expansion, ParameterPair};

fn expansion() -> impl Strategy<Value = Expansion> {
    (-0.95f64..3.0, -0.95f64..3.0, prop::collection::vec(-1.0f64..1.0, 1..24))
        .prop_map(|(a, b, c)| Expansion::from_real(ParameterPair::new(a, b).unwrap(), &c).unwrap())
}

proptest! {
    #[test]
    fn evolution_is_unitary(e in expansion(), t in -50.0f64..50.0) {
        let u = schrodinger_evolution(&e, t).unwrap();
        prop_assert!((u.l2_norm() - e.l2_norm()).abs() <= 1e-14 * e.l2_norm().max(1.0));
    }

    #[test]
    fn evolution_is_a_group(e in expansion(), s in -10.0f64..10.0, t in -10.0f64..10.0) {
        let two_steps = schrodinger_evolution(&schrodinger_evolution(&e, s).unwrap(), t).unwrap();
        let one_step = schrodinger_evolution(&e, s + t).unwrap();
        let err = two_steps
            .coeffs()
            .iter()
            .zip(one_step.coeffs())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        prop_assert!(err <= 1e-11, "{err}");
    }

    #[test]
    fn json_roundtrip_is_exact(e in expansion()) {
        let back = Expansion::from_json(&e.to_json()).unwrap();
        prop_assert_eq!(back.coeffs(), e.coeffs());
        prop_assert_eq!(back.params(), e.params());
    }
}
