//! Simulator and verification harness for tit-for-tat trading in production
//! markets.
//!
//! Each player produces one good. Every round, players hand out their stock
//! according to their current spending fractions, produce in proportion to
//! the value they received, and mirror the received value shares back as next
//! round's fractions. The long-run fate of player `i` is decided by
//! `values[i] * v_star` (with `v_star` the best value in the market): above 1
//! the player's amounts grow geometrically, below 1 they vanish, exactly at 1
//! they stay within a fixed band.
//!
//! The crate is organized around checking that claim, not just simulating:
//!
//! * [`economy`] — validated market descriptions;
//! * [`dynamics`] — the log-space update loop (safe out to horizons where
//!   amounts span hundreds of orders of magnitude);
//! * [`analysis`] — phase classification plus residual checkers for the
//!   conservation laws and the amount sandwich that force the trichotomy;
//! * [`oracle`] — the same dynamic in exact rational arithmetic, as ground
//!   truth for the float engine at small sizes;
//! * [`scenario`] — JSON scenario files, seeded random markets, CSV export.

pub mod analysis;
pub mod dynamics;
pub mod economy;
mod numeric;
pub mod oracle;
pub mod scenario;

pub use analysis::{
    bound_constants, check_amount_bounds, check_conserved_product, check_fraction_decay_envelope,
    check_optimal_ratio_invariance, check_potential_law, check_two_step_identity, classify,
    fraction_limit_profile, growth_exponent, optimal_set, potential, sweep, AnalysisError,
    BoundConstants, LimitProfile, Phase, PhaseReport, PlayerBoundConstants, PlayerLimit,
    PlayerPhase, SweepError, SweepPoint, DEFAULT_TIE_TOLERANCE,
};
pub use dynamics::{FlowMatrix, MarketState, StepError, Trajectory};
pub use economy::{Economy, EconomyError, ROW_SUM_TOLERANCE};
pub use oracle::{
    compare, conserved_product_residual_exact, flow_conservation_residual_exact, ln_rational,
    parse_decimal, potential_residual_exact, rational_to_f64, row_sum_residual_exact,
    two_step_residual_exact, OracleComparison, OracleError, RationalEconomy, RationalState,
};
pub use scenario::{
    generate_random, load_scenario, save_trajectory_csv, scenario_json, Scenario, ScenarioError,
};
