//! Long-run classification and the residual checkers that back it.
//!
//! The market has one distinguished quantity per player: the product
//! `values[i] * v_star`, where `v_star` is the best value in the market.
//! Players with product above 1 grow geometrically, below 1 they vanish, at 1
//! they stay trapped in a fixed band. The checkers in this module measure, in
//! log space, how far a simulated trajectory drifts from the exact relations
//! that force that trichotomy:
//!
//! * the potential law: `x[i](t) * y[i][i](t)` scales by exactly `values[i]`
//!   per round;
//! * the two-step identity linking `y[i][j]` at `t+1` and `t-1`;
//! * conserved products per parity: `x[i](t) * y[i][j](t)` equals
//!   `(v_i v_j)^l` times its anchor value (anchor t = 0 for even times,
//!   t = 1 for odd);
//! * the amount sandwich `c * (v_i v_star)^l <= x[i](t) <= d * (v_i v_star)^l`
//!   with parity-matched constants read off the first two states;
//! * the decay envelope forcing fractions spent on sub-optimal goods to 0.
//!
//! Residuals are absolute differences of log quantities, so they stay
//! meaningful when amounts span hundreds of orders of magnitude.

use crate::dynamics::Trajectory;
use crate::economy::{Economy, EconomyError};
use crate::StepError;
use thiserror::Error;

/// Default relative tolerance for deciding value ties (optimal-set
/// membership, and the dead band around product = 1 for `Bounded`).
pub const DEFAULT_TIE_TOLERANCE: f64 = 1e-12;

/// Analysis preconditions that a caller can violate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("trajectory has {got} states but the computation needs at least {needed}")]
    TrajectoryTooShort { needed: usize, got: usize },
    #[error("player {player} is out of range for a market of {n} players")]
    PlayerOutOfRange { player: usize, n: usize },
}

/// Failures while sweeping a value grid.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error(transparent)]
    Economy(#[from] EconomyError),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// Long-run fate of a single player.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// `values[i] * v_star > 1`: amounts grow without bound.
    Grows,
    /// `values[i] * v_star < 1`: amounts decay to zero.
    Vanishes,
    /// `values[i] * v_star = 1` (within tolerance): amounts stay in a band.
    Bounded,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Phase::Grows => "Grows",
            Phase::Vanishes => "Vanishes",
            Phase::Bounded => "Bounded",
        })
    }
}

/// Classification entry for one player.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerPhase {
    pub player: usize,
    /// The player's own good value.
    pub value: f64,
    /// `values[player] * v_star`, the per-two-rounds growth factor.
    pub product: f64,
    /// `product - 1`; sign decides the phase outside the dead band.
    pub margin: f64,
    pub phase: Phase,
}

/// Classification of every player in a market.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseReport {
    pub players: Vec<PlayerPhase>,
}

/// Goods whose value is within `tie_tolerance` (relative) of the best one:
/// `{ j : values[j] >= v_star * (1 - tie_tolerance) }`, ascending.
pub fn optimal_set(values: &[f64], tie_tolerance: f64) -> Vec<usize> {
    let v_star = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let cutoff = v_star * (1.0 - tie_tolerance);
    (0..values.len()).filter(|&j| values[j] >= cutoff).collect()
}

/// Classifies every player by the sign of `values[i] * v_star - 1`, with a
/// `tie_tolerance`-wide dead band mapped to [`Phase::Bounded`].
pub fn classify(economy: &Economy, tie_tolerance: f64) -> PhaseReport {
    let v_star = economy.max_value();
    let players = economy
        .values()
        .iter()
        .enumerate()
        .map(|(player, &value)| {
            let product = value * v_star;
            let phase = if product > 1.0 + tie_tolerance {
                Phase::Grows
            } else if product < 1.0 - tie_tolerance {
                Phase::Vanishes
            } else {
                Phase::Bounded
            };
            PlayerPhase {
                player,
                value,
                product,
                margin: product - 1.0,
                phase,
            }
        })
        .collect();
    PhaseReport { players }
}

/// `ln(x[i](t) * y[i][i](t))`, the log of the quantity that scales by exactly
/// `values[i]` each round.
///
/// Panics if `player` is out of range.
pub fn potential(state: &crate::MarketState, player: usize) -> f64 {
    state.amount_log(player) + state.log_fraction(player, player)
}

/// Max over players and times of
/// `|potential(t) - t * ln values[i] - potential(0)|`.
pub fn check_potential_law(traj: &Trajectory) -> f64 {
    let n = traj.economy().n();
    let log_values: Vec<f64> = traj.economy().values().iter().map(|v| v.ln()).collect();
    let base: Vec<f64> = (0..n).map(|i| potential(traj.state(0), i)).collect();
    let mut worst = 0.0f64;
    for state in traj.states() {
        let t = state.t() as f64;
        for i in 0..n {
            let residual = (potential(state, i) - t * log_values[i] - base[i]).abs();
            worst = worst.max(residual);
        }
    }
    worst
}

/// Max over players, goods, and interior times of the two-step identity
/// residual `|ln y[i][j](t+1) + ln x[i](t+1)
///            - ln(v_i v_j) - ln y[i][j](t-1) - ln x[i](t-1)|`.
pub fn check_two_step_identity(traj: &Trajectory) -> f64 {
    let n = traj.economy().n();
    let log_values: Vec<f64> = traj.economy().values().iter().map(|v| v.ln()).collect();
    let horizon = traj.horizon();
    let mut worst = 0.0f64;
    if horizon < 2 {
        return worst;
    }
    for t in 1..horizon {
        let prev = traj.state(t - 1);
        let next = traj.state(t + 1);
        for i in 0..n {
            let step2 = next.amount_log(i) - prev.amount_log(i);
            for j in 0..n {
                let residual = (next.log_fraction(i, j) + step2
                    - log_values[i]
                    - log_values[j]
                    - prev.log_fraction(i, j))
                .abs();
                worst = worst.max(residual);
            }
        }
    }
    worst
}

/// Max over players, goods, parities, and times of the conserved-product
/// residual: `x[i](t) * y[i][j](t)` against `(v_i v_j)^l` times the value at
/// the parity's anchor (t = 0 for even times, t = 1 for odd), in logs.
pub fn check_conserved_product(traj: &Trajectory) -> f64 {
    let n = traj.economy().n();
    let log_values: Vec<f64> = traj.economy().values().iter().map(|v| v.ln()).collect();
    let horizon = traj.horizon();
    let mut worst = 0.0f64;
    for anchor in 0..=horizon.min(1) {
        let anchor_state = traj.state(anchor);
        let anchor_logs: Vec<f64> = (0..n * n)
            .map(|k| anchor_state.amount_log(k / n) + anchor_state.log_fraction(k / n, k % n))
            .collect();
        let mut t = anchor;
        while t <= horizon {
            let l = ((t - anchor) / 2) as f64;
            let state = traj.state(t);
            for i in 0..n {
                let amount = state.amount_log(i);
                for j in 0..n {
                    let residual = (amount + state.log_fraction(i, j)
                        - l * (log_values[i] + log_values[j])
                        - anchor_logs[i * n + j])
                        .abs();
                    worst = worst.max(residual);
                }
            }
            t += 2;
        }
    }
    worst
}

/// Sandwich constants for one player, stored as logs. Odd-time constants are
/// read off the state at t = 1, even-time constants off t = 0:
/// `c = x[i](anchor) * y[i][i_star](anchor)` and `d = x[i](anchor)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerBoundConstants {
    pub log_c_even: f64,
    pub log_d_even: f64,
    pub log_c_odd: f64,
    pub log_d_odd: f64,
}

/// Sandwich constants for every player plus the optimal good they reference.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundConstants {
    /// Index of a best-valued good, ties broken toward the lowest index.
    pub i_star: usize,
    pub players: Vec<PlayerBoundConstants>,
}

/// Reads the sandwich constants off the first two states of a run.
///
/// Needs the states at t = 0 and t = 1; errors if the trajectory is shorter.
pub fn bound_constants(traj: &Trajectory) -> Result<BoundConstants, AnalysisError> {
    if traj.states().len() < 2 {
        return Err(AnalysisError::TrajectoryTooShort {
            needed: 2,
            got: traj.states().len(),
        });
    }
    let i_star = traj.economy().best_good();
    let (s0, s1) = (traj.state(0), traj.state(1));
    let players = (0..traj.economy().n())
        .map(|i| PlayerBoundConstants {
            log_c_even: s0.amount_log(i) + s0.log_fraction(i, i_star),
            log_d_even: s0.amount_log(i),
            log_c_odd: s1.amount_log(i) + s1.log_fraction(i, i_star),
            log_d_odd: s1.amount_log(i),
        })
        .collect();
    Ok(BoundConstants { i_star, players })
}

/// Worst signed violation (log units) of the amount sandwich
/// `ln c + l * ln(v_i v_star) <= ln x[i](t) <= ln d + l * ln(v_i v_star)`
/// across all players and times, with parity-matched constants and
/// `l = floor(t / 2)`. Positive means a bound was crossed; when the sandwich
/// holds this is at most round-off.
pub fn check_amount_bounds(traj: &Trajectory, bounds: &BoundConstants) -> f64 {
    let log_values: Vec<f64> = traj.economy().values().iter().map(|v| v.ln()).collect();
    let log_v_star = log_values[bounds.i_star];
    let mut worst = f64::NEG_INFINITY;
    for state in traj.states() {
        let l = (state.t() / 2) as f64;
        let odd = state.t() % 2 == 1;
        for (i, b) in bounds.players.iter().enumerate() {
            let (log_c, log_d) = if odd {
                (b.log_c_odd, b.log_d_odd)
            } else {
                (b.log_c_even, b.log_d_even)
            };
            let rate = l * (log_values[i] + log_v_star);
            let amount = state.amount_log(i);
            worst = worst.max(log_c + rate - amount); // lower bound crossed?
            worst = worst.max(amount - (log_d + rate)); // upper bound crossed?
        }
    }
    worst
}

/// Worst signed excess (log units) of sub-optimal fractions over their decay
/// envelope `y[i][j](t) <= K[i][j] * (v_j / v_star)^l`, where
/// `K[i][j] = x[i](anchor) * y[i][j](anchor) / c[i]` uses the parity-matched
/// lower sandwich constant. Positive means the envelope was crossed. Returns
/// 0 when every good is optimal (nothing to check).
pub fn check_fraction_decay_envelope(
    traj: &Trajectory,
    bounds: &BoundConstants,
    tie_tolerance: f64,
) -> f64 {
    let n = traj.economy().n();
    let log_values: Vec<f64> = traj.economy().values().iter().map(|v| v.ln()).collect();
    let log_v_star = log_values[bounds.i_star];
    let optimal = optimal_set(traj.economy().values(), tie_tolerance);
    let suboptimal: Vec<usize> = (0..n).filter(|j| !optimal.contains(j)).collect();
    if suboptimal.is_empty() {
        return 0.0;
    }
    let horizon = traj.horizon();
    let mut worst = f64::NEG_INFINITY;
    for anchor in 0..=horizon.min(1) {
        let odd = anchor == 1;
        let anchor_state = traj.state(anchor);
        let mut t = anchor;
        while t <= horizon {
            let l = ((t - anchor) / 2) as f64;
            let state = traj.state(t);
            for i in 0..n {
                let b = &bounds.players[i];
                let log_c = if odd { b.log_c_odd } else { b.log_c_even };
                let log_k_base = anchor_state.amount_log(i) - log_c;
                for &j in &suboptimal {
                    let envelope = log_k_base
                        + anchor_state.log_fraction(i, j)
                        + l * (log_values[j] - log_v_star);
                    worst = worst.max(state.log_fraction(i, j) - envelope);
                }
            }
            t += 2;
        }
    }
    worst
}

/// Where each player's fraction mass sits at the end of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerLimit {
    /// Total fraction spent on optimal goods.
    pub mass_on_optimal: f64,
    /// Largest single fraction still spent on a sub-optimal good
    /// (0 when every good is optimal).
    pub max_suboptimal_fraction: f64,
}

/// Fraction mass profile at the final state.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitProfile {
    pub players: Vec<PlayerLimit>,
}

/// Measures, at the final state, how much of each player's spending sits on
/// the optimal goods versus the largest sub-optimal leak.
pub fn fraction_limit_profile(traj: &Trajectory, tie_tolerance: f64) -> LimitProfile {
    let n = traj.economy().n();
    let optimal = optimal_set(traj.economy().values(), tie_tolerance);
    let last = traj.state(traj.horizon());
    let players = (0..n)
        .map(|i| {
            let mut mass = 0.0;
            let mut leak = 0.0f64;
            for j in 0..n {
                let y = last.fraction(i, j);
                if optimal.contains(&j) {
                    mass += y;
                } else {
                    leak = leak.max(y);
                }
            }
            PlayerLimit {
                mass_on_optimal: mass,
                max_suboptimal_fraction: leak,
            }
        })
        .collect();
    LimitProfile { players }
}

/// Max drift (log units) of the ratio `y[i][a](t) / y[i][b](t)` between tied
/// optimal goods `a`, `b`, measured per parity against its anchor value.
/// Exactly tied goods make this ratio a constant of the motion. Returns 0
/// when fewer than two goods are optimal.
pub fn check_optimal_ratio_invariance(traj: &Trajectory, tie_tolerance: f64) -> f64 {
    let optimal = optimal_set(traj.economy().values(), tie_tolerance);
    if optimal.len() < 2 {
        return 0.0;
    }
    let n = traj.economy().n();
    let horizon = traj.horizon();
    let mut worst = 0.0f64;
    for anchor in 0..=horizon.min(1) {
        let anchor_state = traj.state(anchor);
        let mut t = anchor;
        while t <= horizon {
            let state = traj.state(t);
            for i in 0..n {
                for (k, &a) in optimal.iter().enumerate() {
                    for &b in &optimal[k + 1..] {
                        let now = state.log_fraction(i, a) - state.log_fraction(i, b);
                        let then =
                            anchor_state.log_fraction(i, a) - anchor_state.log_fraction(i, b);
                        worst = worst.max((now - then).abs());
                    }
                }
            }
            t += 2;
        }
    }
    worst
}

/// Empirical per-two-rounds growth exponent of player `i`'s amount, measured
/// over the second half of the run: `(ln x[i](T) - ln x[i](T - 2k)) / k`
/// with `k = ceil(floor(T/2) / 2)`. The first half is discarded as
/// transient, and both endpoints share `T`'s parity so the even/odd
/// oscillation cancels instead of polluting the rate.
///
/// Needs a horizon of at least 2 steps.
pub fn growth_exponent(traj: &Trajectory, player: usize) -> Result<f64, AnalysisError> {
    let n = traj.economy().n();
    if player >= n {
        return Err(AnalysisError::PlayerOutOfRange { player, n });
    }
    let horizon = traj.horizon();
    if horizon < 2 {
        return Err(AnalysisError::TrajectoryTooShort {
            needed: 3,
            got: traj.states().len(),
        });
    }
    let kept = (horizon / 2).div_ceil(2);
    let start = horizon - 2 * kept;
    Ok(
        (traj.state(horizon).amount_log(player) - traj.state(start).amount_log(player))
            / kept as f64,
    )
}

/// One grid point of a value sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    /// The value assigned to the swept player.
    pub value: f64,
    pub phase: Phase,
    /// Measured per-two-rounds exponent of the swept player.
    pub empirical_exponent: f64,
    /// `ln(value * v_star)` for the modified market.
    pub theoretical_exponent: f64,
}

/// Reruns the market once per grid value with `values[player]` replaced,
/// classifying and measuring the swept player each time. Grid points are
/// independent of each other.
pub fn sweep(
    base: &Economy,
    player: usize,
    value_grid: &[f64],
    steps: u64,
    tie_tolerance: f64,
) -> Result<Vec<SweepPoint>, SweepError> {
    let mut points = Vec::with_capacity(value_grid.len());
    for &value in value_grid {
        let economy = base.with_value(player, value)?;
        let phase = classify(&economy, tie_tolerance).players[player].phase;
        let traj = economy.run(steps)?;
        let empirical_exponent = growth_exponent(&traj, player)?;
        points.push(SweepPoint {
            value,
            phase,
            empirical_exponent,
            theoretical_exponent: (value * economy.max_value()).ln(),
        });
    }
    Ok(points)
}
