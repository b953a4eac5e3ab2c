//! Sparse k-register query states, diagonal phase oracles and measurement.

mod measurement;
mod oracle;
mod state;

pub use measurement::{
    measure, BasisRecord, Distribution, Measurement, MeasurementFile, Povm, PovmElementRecord,
    ProjectiveOutcome, ProjectiveRecord,
};
pub use oracle::{oracle_phase, IndexTuple, OracleString};
pub use state::{
    apply_oracle, inner_product, random_state, BasisLabel, EntryRecord, QueryState, StateFile, TOL,
};

#[cfg(test)]
mod proptests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;

    fn arb_string(n: usize) -> impl Strategy<Value = OracleString> {
        prop::collection::vec(any::<bool>(), n).prop_map(|b| OracleString::new(b).unwrap())
    }

    fn arb_case() -> impl Strategy<Value = (QueryState, OracleString, OracleString)> {
        (1usize..6, 1usize..4, 1usize..3, 1usize..30, any::<u64>()).prop_flat_map(
            |(n, k, anc, support, seed)| {
                let psi = random_state(n, k, anc, support, &mut rng::stream(seed, "prop")).unwrap();
                (Just(psi), arb_string(n), arb_string(n))
            },
        )
    }

    proptest! {
        #[test]
        fn oracle_is_an_involution((psi, x, _y) in arb_case()) {
            let twice = apply_oracle(&apply_oracle(&psi, &x).unwrap(), &x).unwrap();
            prop_assert_eq!(twice, psi);
        }

        #[test]
        fn oracles_compose_by_xor((psi, x, y) in arb_case()) {
            let left = apply_oracle(&apply_oracle(&psi, &x).unwrap(), &y).unwrap();
            let right = apply_oracle(&psi, &x.xor(&y).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn oracle_preserves_norm_exactly((psi, x, _y) in arb_case()) {
            let out = apply_oracle(&psi, &x).unwrap();
            prop_assert_eq!(out.norm_sqr(), psi.norm_sqr());
        }

        #[test]
        fn computational_measurement_sums_to_one((psi, x, _y) in arb_case()) {
            let outcomes = psi
                .support()
                .map(|(t, a)| {
                    let mut e = QueryState::new(psi.n(), psi.k(), psi.ancilla_dim()).unwrap();
                    e.add(t.clone(), *a, num_complex::Complex64::new(1.0, 0.0)).unwrap();
                    ProjectiveOutcome { label: format!("{t}/{a}"), state: e }
                })
                .collect();
            let meas = Measurement::projective(outcomes).unwrap();
            let d = measure(&apply_oracle(&psi, &x).unwrap(), &meas).unwrap();
            prop_assert!((d.total() - 1.0).abs() <= 1e-9);
            prop_assert!(d.iter().all(|(_, p)| (0.0..=1.0).contains(&p)));
        }
    }
}
