//! Randomized invariants of the exchange dynamic: properties that must hold
//! for every well-formed market, not just the hand-worked cases in the unit
//! tests. Markets are drawn from raw positive parts and run for short
//! horizons; structural identities are checked at every visited state.

use proptest::collection::vec;
use proptest::prelude::*;
use tft_market::{
    check_conserved_product, check_potential_law, check_two_step_identity, classify,
    generate_random, load_scenario, optimal_set, save_trajectory_csv, scenario_json, Economy,
    Phase, DEFAULT_TIE_TOLERANCE,
};

/// Markets with up to `max_n` players: values and amounts in moderate ranges,
/// fraction rows normalized from positive weights so no entry is degenerate.
fn economies(max_n: usize) -> impl Strategy<Value = Economy> {
    (1..=max_n).prop_flat_map(|n| {
        (
            vec(0.1..3.0f64, n),
            vec(0.1..10.0f64, n),
            vec(vec(0.05..1.0f64, n), n),
        )
            .prop_map(|(values, amounts, weights)| {
                let fractions: Vec<Vec<f64>> = weights
                    .into_iter()
                    .map(|row| {
                        let sum: f64 = row.iter().sum();
                        row.into_iter().map(|w| w / sum).collect()
                    })
                    .collect();
                Economy::new(values, amounts, fractions).expect("normalized rows are valid")
            })
    })
}

fn horizons() -> impl Strategy<Value = u64> {
    0u64..50
}

proptest! {
    /// Every fraction row stays a probability distribution along the run.
    #[test]
    fn fraction_rows_stay_stochastic(e in economies(6), steps in horizons()) {
        let traj = e.run(steps).unwrap();
        for state in traj.states() {
            for i in 0..e.n() {
                let sum = state.fraction_row_sum(i);
                prop_assert!((sum - 1.0).abs() < 1e-12, "t={} row {i} sums to {sum}", state.t());
            }
        }
    }

    /// Scaling every starting amount by a common factor scales every later
    /// amount by the same factor and leaves the fractions untouched.
    #[test]
    fn dynamic_is_scale_invariant(
        e in economies(5),
        alpha in 0.01..100.0f64,
        steps in 0u64..40,
    ) {
        let scaled = Economy::new(
            e.values().to_vec(),
            e.initial_amounts().iter().map(|&a| alpha * a).collect(),
            e.initial_fractions().to_vec(),
        )
        .unwrap();
        let base = e.run(steps).unwrap();
        let big = scaled.run(steps).unwrap();
        let log_alpha = alpha.ln();
        for (s0, s1) in base.states().iter().zip(big.states()) {
            for i in 0..e.n() {
                let diff = s1.amount_log(i) - s0.amount_log(i);
                prop_assert!((diff - log_alpha).abs() < 1e-9, "t={} player {i}: {diff} vs {log_alpha}", s0.t());
                for j in 0..e.n() {
                    let df = s1.log_fraction(i, j) - s0.log_fraction(i, j);
                    prop_assert!(df.abs() < 1e-9, "t={} fraction ({i},{j}) moved by {df}", s0.t());
                }
            }
        }
    }

    /// Each round hands out exactly the stock on hand: the exchange column
    /// for good `j` totals `x_j`.
    #[test]
    fn exchange_spends_each_stock(e in economies(6), steps in horizons()) {
        let traj = e.run(steps).unwrap();
        for state in traj.states() {
            let flows = state.flows();
            for j in 0..e.n() {
                let stock = (state.amount_log(j) - state.log_offset()).exp();
                let handed_out = flows.column_sum(j);
                prop_assert!(
                    (handed_out / stock - 1.0).abs() < 1e-12,
                    "t={} good {j}: handed out {handed_out} of stock {stock}",
                    state.t()
                );
            }
        }
    }

    /// No state ever contains a NaN or infinity.
    #[test]
    fn trajectories_stay_finite(e in economies(6), steps in horizons()) {
        let traj = e.run(steps).unwrap();
        for state in traj.states() {
            prop_assert!(state.log_offset().is_finite());
            for i in 0..e.n() {
                prop_assert!(state.amount_log(i).is_finite());
                for j in 0..e.n() {
                    prop_assert!(state.log_fraction(i, j).is_finite());
                }
            }
        }
    }

    /// Two runs of the same market agree bit for bit.
    #[test]
    fn runs_are_bit_reproducible(e in economies(6), steps in horizons()) {
        let a = e.run(steps).unwrap();
        let b = e.run(steps).unwrap();
        for (sa, sb) in a.states().iter().zip(b.states()) {
            prop_assert_eq!(sa.log_offset().to_bits(), sb.log_offset().to_bits());
            for i in 0..e.n() {
                prop_assert_eq!(sa.amount_log(i).to_bits(), sb.amount_log(i).to_bits());
                for j in 0..e.n() {
                    prop_assert_eq!(
                        sa.log_fraction(i, j).to_bits(),
                        sb.log_fraction(i, j).to_bits()
                    );
                }
            }
        }
    }

    /// The per-player product `x_i(t) * y_ii(t)` compounds by exactly
    /// `values[i]` per round, and the two-round recurrences close, up to
    /// float rounding.
    #[test]
    fn structural_identities_hold(e in economies(5), steps in 2u64..40) {
        let traj = e.run(steps).unwrap();
        prop_assert!(check_potential_law(&traj) < 1e-10);
        prop_assert!(check_two_step_identity(&traj) < 1e-10);
        prop_assert!(check_conserved_product(&traj) < 1e-10);
    }

    /// Classification is decided by the sign of `v_i * v_star - 1`, and the
    /// optimal set always contains the best good.
    #[test]
    fn classification_matches_margins(e in economies(6)) {
        let report = classify(&e, DEFAULT_TIE_TOLERANCE);
        prop_assert_eq!(report.players.len(), e.n());
        for p in &report.players {
            prop_assert_eq!(p.product, p.value * e.max_value());
            prop_assert_eq!(p.margin, p.product - 1.0);
            match p.phase {
                Phase::Grows => prop_assert!(p.margin > DEFAULT_TIE_TOLERANCE),
                Phase::Vanishes => prop_assert!(p.margin < -DEFAULT_TIE_TOLERANCE),
                Phase::Bounded => prop_assert!(p.margin.abs() <= DEFAULT_TIE_TOLERANCE),
            }
        }
        let optimal = optimal_set(e.values(), DEFAULT_TIE_TOLERANCE);
        prop_assert!(!optimal.is_empty());
        prop_assert!(optimal.contains(&e.best_good()));
        prop_assert!(optimal.windows(2).all(|w| w[0] < w[1]));
        for &j in &optimal {
            prop_assert!(e.value(j) >= e.max_value() * (1.0 - DEFAULT_TIE_TOLERANCE));
        }
    }

    /// The seeded generator is a pure function of its arguments and always
    /// produces a well-formed market with unit starting amounts.
    #[test]
    fn generator_is_deterministic_and_valid(
        n in 1usize..20,
        seed in any::<u64>(),
        low in 0.1..1.0f64,
        span in 0.0..2.0f64,
    ) {
        let high = low + span;
        let a = generate_random(n, seed, low, high).unwrap();
        let b = generate_random(n, seed, low, high).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.n(), n);
        for i in 0..n {
            prop_assert!(a.value(i) >= low && a.value(i) <= high);
            prop_assert_eq!(a.initial_amounts()[i], 1.0);
            let sum: f64 = a.initial_fractions()[i].iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-15);
        }
    }

    /// Rendering a market as a scenario document and loading it back
    /// reproduces the market exactly, along with any run parameters.
    #[test]
    fn scenario_documents_round_trip(
        e in economies(5),
        steps in proptest::option::of(0u64..10_000),
        seed in proptest::option::of(any::<u64>()),
    ) {
        let text = scenario_json(&e, steps, Some(DEFAULT_TIE_TOLERANCE), seed);
        let scenario = load_scenario(&text).unwrap();
        prop_assert_eq!(&scenario.economy, &e);
        prop_assert_eq!(scenario.steps, steps);
        prop_assert_eq!(scenario.tie_tolerance, Some(DEFAULT_TIE_TOLERANCE));
        prop_assert_eq!(scenario.seed, seed);
    }

    /// A saved trajectory holds a header plus one amount row per player and
    /// one fraction row per pair, for every recorded time.
    #[test]
    fn csv_covers_the_full_grid(e in economies(5), steps in 0u64..20) {
        let traj = e.run(steps).unwrap();
        let mut buf = Vec::new();
        save_trajectory_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        let n = e.n();
        let expected = 1 + (steps as usize + 1) * (n + n * n);
        prop_assert_eq!(lines.len(), expected);
        prop_assert_eq!(lines[0], "t,kind,i,j,value");
    }
}
