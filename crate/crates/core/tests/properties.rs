use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use proptest::prelude::*;

use rotwave::extension::{extend_full, region_of, wrap_angle, Phase, Region};
use rotwave::lattice::LatticeIndex;
use rotwave::solver::{jacobian, residual, solve_equilibrium, ReducedState, SolverOptions};
use rotwave::spectral::{build_linearization, DEFAULT_PINNED};
use rotwave::CouplingFunction;

fn reduced_state() -> impl Strategy<Value = ReducedState> {
    (2usize..9).prop_flat_map(|n| {
        prop::collection::vec(1e-6..FRAC_PI_4, n * (n - 1) / 2).prop_map(move |v| ReducedState::new(n, v).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn wrapped_angles_land_in_half_open_interval(x in -50.0f64..50.0) {
        let w = wrap_angle(x);
        prop_assert!(w > -PI && w <= PI);
        let turns = (x - w) / (2.0 * PI);
        prop_assert!((turns - turns.round()).abs() < 1e-9);
    }

    #[test]
    fn phase_difference_is_antisymmetric(qa in 0i64..4, qb in 0i64..4, a in -0.7f64..0.7, b in -0.7f64..0.7) {
        let (p, q) = (Phase::new(qa, a), Phase::new(qb, b));
        let d = p.difference(q);
        let e = q.difference(p);
        if d.abs() < PI - 1e-9 {
            prop_assert!((d + e).abs() < 1e-15);
        }
        prop_assert!((wrap_angle(p.radians() - q.radians()) - d).abs() < 1e-12);
    }

    #[test]
    fn jacobian_is_symmetric(state in reduced_state()) {
        let j = jacobian(&state, &CouplingFunction::sine());
        prop_assert!(j.is_symmetric());
        let j = jacobian(&state, &CouplingFunction::sine_harmonic());
        prop_assert!(j.is_symmetric());
    }

    #[test]
    fn residual_is_finite_and_bounded(state in reduced_state()) {
        let r = residual(&state, &CouplingFunction::sine());
        prop_assert!(r.iter().all(|v| v.is_finite() && v.abs() <= 4.0));
    }

    #[test]
    fn symmetry_table_holds_for_any_state(state in reduced_state()) {
        let full = extend_full(&state);
        for (idx, theta) in state.iter() {
            let mirror = full.get(LatticeIndex::new(idx.j, idx.i)).unwrap();
            prop_assert_eq!(mirror.radians(), -theta);
            let below = full.get(LatticeIndex::new(idx.i, 1 - idx.j)).unwrap();
            prop_assert!((below.radians() - (FRAC_PI_2 - theta)).abs() < 1e-15);
            // Quarter turn about the centre adds π/2.
            let turned = LatticeIndex::new(idx.j, 1 - idx.i);
            prop_assert_eq!(region_of(turned), Region::III);
            let d = full.get(turned).unwrap().difference(full.get(idx).unwrap());
            prop_assert!((d - FRAC_PI_2).abs() < 1e-15);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn pinned_quadratic_form_is_nonnegative(x in prop::collection::vec(-1.0f64..1.0, 80)) {
        thread_local! {
            static OP: rotwave::LinearizationOperator = {
                let h = CouplingFunction::sine();
                let s = solve_equilibrium(6, &h, &SolverOptions::default()).unwrap().state;
                build_linearization(&extend_full(&s), DEFAULT_PINNED, 4, &h).unwrap()
            };
        }
        OP.with(|op| {
            let q = op.quadratic_form(&x).unwrap();
            prop_assert!(q >= 0.0);
            let lx = op.apply(&x).unwrap();
            let m: f64 = -lx.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
            prop_assert!((q - m).abs() <= 1e-10 * q.max(1e-12));
            Ok(())
        })?;
    }
}
