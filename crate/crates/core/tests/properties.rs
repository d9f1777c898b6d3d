//! Property suites on seeded random maps and series.

#[path = "support/invariants.rs"]
mod invariants;

use std::collections::HashMap;

use dynledger::ratmap::parse_map;
use invariants::*;
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn ram_n_increases_and_pulls_back(f in small_map(), n in 0usize..5) {
        ram_n_monotone(&f, n)?;
    }

    #[test]
    fn ramification_splits_without_loss(f in small_map()) {
        divisor_conserved(&f)?;
    }

    #[test]
    fn periodic_points_have_full_count(f in small_map(), p in 1usize..3) {
        periodic_count(&f, p)?;
    }

    #[test]
    fn multipliers_are_conjugation_invariant(f in small_map(), g in mobius()) {
        multiplier_invariant(&f, &g)?;
    }

    #[test]
    fn global_equalizer_dimensions(f in (2usize..6).prop_flat_map(rational)) {
        global_dims(&f)?;
    }

    #[test]
    fn mobius_equalizer_dimensions(g in mobius()) {
        let f = g.as_map().unwrap();
        prop_assume!(f.degree() == 1);
        global_dims(&f)?;
    }

    #[test]
    fn nu_matches_closed_form_and_is_conjugation_invariant((f, a, b) in parabolic_germ(1), g in mobius()) {
        nu_invariant(&f, a, b, &g)?;
    }

    #[test]
    fn nu_is_stable_in_the_truncation((f, _, _) in (1u32..4).prop_flat_map(parabolic_germ)) {
        nu_stable(&f)?;
    }

    #[test]
    fn fatou_coordinates_solve_the_abel_equation((f, _, _) in (1u32..3).prop_flat_map(parabolic_germ)) {
        abel_residual(&f)?;
    }

    #[test]
    fn series_reversion_round_trips(a in invertible_series()) {
        reversion_round_trip(&a)?;
    }
}

#[test]
fn quadratic_strategy_agrees_with_the_parser() {
    let c = Complex64::new(-0.12, 0.74);
    let parsed = parse_map("z^2 + c", &HashMap::from([("c".to_string(), c)])).unwrap();
    assert_eq!(parsed, quadratic(c));
}
