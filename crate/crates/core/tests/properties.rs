//! Invariants checked on random inputs.

use num_rational::BigRational;
use proptest::prelude::*;

use splitlab::cfq::{build_spectral, PeriodicCf};
use splitlab::envelope::EnvelopeOptions;
use splitlab::exactnum::{IVec2, Surd};
use splitlab::report::build_envelope;
use splitlab::resonance::ResonanceCatalog;

fn surd_in(d: i64) -> impl Strategy<Value = Surd> {
    (-50i64..50, -20i64..20, 1i64..30).prop_map(move |(p, s, q)| Surd::new(p, s, d, q).unwrap())
}

fn small_cf() -> impl Strategy<Value = PeriodicCf> {
    (prop::collection::vec(1u64..8, 0..3), prop::collection::vec(1u64..8, 1..4))
        .prop_map(|(pre, per)| PeriodicCf::new(pre, per).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn field_operations_are_exact(a in surd_in(7), b in surd_in(7)) {
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        if !b.is_zero() {
            prop_assert_eq!(&(&a * &b) / &b, a.clone());
        }
        prop_assert_eq!(Surd::from_ratio(&a.norm()), &a * &a.conj());
    }

    #[test]
    fn order_agrees_with_floats(a in surd_in(11), b in surd_in(11)) {
        let (x, y) = (a.to_f64(), b.to_f64());
        if (x - y).abs() > 1e-9 {
            prop_assert_eq!(a < b, x < y);
        }
        prop_assert!(a.floor() <= a.ceil());
    }

    #[test]
    fn canonical_form_is_stable(cf in small_cf()) {
        let again = PeriodicCf::new(cf.pre().to_vec(), cf.per().to_vec()).unwrap();
        prop_assert_eq!(&again, &cf);
        let text = cf.to_string();
        prop_assert_eq!(text.parse::<PeriodicCf>().unwrap(), cf);
    }

    #[test]
    fn iteration_matrix_is_unimodular_and_contracts_resonances(cf in small_cf()) {
        let sd = build_spectral(&cf.tail()).unwrap();
        prop_assert!(sd.u.is_unimodular());
        let cat = ResonanceCatalog::build(&sd, &BigRational::from_integer(3.into())).unwrap();
        for r in cat.records().iter().take(5) {
            // U k multiplies <k, omega> by 1/lambda
            let next = sd.u.apply(&r.k0);
            let before = sd.small_divisor(&r.k0).abs().to_f64();
            let after = sd.small_divisor(&next).abs().to_f64();
            prop_assert!((after * sd.lambda_f64() / before - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn half_lattice_is_idempotent(k1 in -1000i64..1000, k2 in -1000i64..1000) {
        let v = IVec2::new(k1, k2);
        let h = v.to_half_lattice();
        prop_assert_eq!(h.to_half_lattice(), h.clone());
        prop_assert!(h == v || h == -&v);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn envelopes_are_ordered_and_periodic(per in prop::collection::vec(1u64..5, 1..3), t in 0.0f64..1.0) {
        let cf = PeriodicCf::purely_periodic(per).unwrap();
        let (_, env) = build_envelope(&cf, &EnvelopeOptions::default()).unwrap();
        let u = env.window.0 + t * env.period();
        let h: Vec<f64> = (1..=3).map(|i| env.h(i, u)).collect();
        prop_assert!(h[0] <= h[1] && h[1] <= h[2]);
        prop_assert!(h[0] >= 1.0 - 1e-12);
        prop_assert!(h[0] <= env.constants.j1 * (1.0 + 1e-9));
        prop_assert!(h[0] <= env.h_bar(1, u) * (1.0 + 1e-12));
        for i in 1..=3 {
            let shifted = env.h(i, u - env.period());
            prop_assert!((shifted - h[i - 1]).abs() <= 1e-9 * h[i - 1]);
        }
    }
}
