//! The trading round itself, carried in log space.
//!
//! One round, from the state at time `t`:
//!
//! * exchange: player `i` receives `w[i][j] = y[j][i] * x[j]` units of good
//!   `j` — each producer `j` splits its stock according to its fraction row;
//! * production: `x[i](t+1) = sum_j values[j] * w[i][j]`;
//! * reciprocation: `y[i][j](t+1) = values[j] * w[i][j] / x[i](t+1)` — next
//!   round each player spends in proportion to the value just received.
//!
//! Amounts grow or shrink geometrically, so the state keeps `ln x` split into
//! per-player entries plus one shared offset; after every round the entries
//! are renormalized so the largest stored amount is exactly 1. Fractions are
//! kept as `ln y` for the same reason: a frozen-out player's fractions decay
//! geometrically and would leave f64 range long before the horizons the
//! checkers care about. Both are materialized on demand.

use crate::economy::Economy;
use crate::numeric::argmax;
use thiserror::Error;

/// Engine failures. These indicate corrupted state or a bug, never a valid
/// market: construction guarantees the update stays finite.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error("production for player {player} became non-finite stepping from t={t}")]
    NonFinite { player: usize, t: u64 },
}

/// Market state at a single time `t`: log amounts relative to a shared
/// offset, and log spending fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketState {
    t: u64,
    log_amounts: Vec<f64>,
    log_offset: f64,
    log_fractions: Vec<f64>, // row-major n*n, entry (i, j) = ln y[i][j]
}

impl MarketState {
    /// Time index of this state.
    pub fn t(&self) -> u64 {
        self.t
    }

    /// Number of players.
    pub fn n(&self) -> usize {
        self.log_amounts.len()
    }

    /// `ln x[i](t)`, the full log amount including the shared offset.
    ///
    /// Panics if `i` is out of range.
    pub fn amount_log(&self, i: usize) -> f64 {
        self.log_amounts[i] + self.log_offset
    }

    /// Offset-relative log amounts; the largest entry is 0 for every state
    /// produced by a step (the initial state keeps raw `ln x(0)`).
    pub fn log_amounts(&self) -> &[f64] {
        &self.log_amounts
    }

    /// Shared log offset; 0 at t = 0.
    pub fn log_offset(&self) -> f64 {
        self.log_offset
    }

    /// Spending fraction `y[i][j](t)`.
    ///
    /// Panics if an index is out of range.
    pub fn fraction(&self, i: usize, j: usize) -> f64 {
        self.log_fraction(i, j).exp()
    }

    /// `ln y[i][j](t)`. Finite for every reachable state.
    ///
    /// Panics if an index is out of range.
    pub fn log_fraction(&self, i: usize, j: usize) -> f64 {
        let n = self.n();
        assert!(
            i < n && j < n,
            "fraction index ({i}, {j}) out of range for n = {n}"
        );
        self.log_fractions[i * n + j]
    }

    /// Sum of player `i`'s spending fractions; 1 up to round-off.
    pub fn fraction_row_sum(&self, i: usize) -> f64 {
        let n = self.n();
        let mut sum = 0.0;
        let mut comp = 0.0;
        for j in 0..n {
            let y = self.log_fractions[i * n + j].exp() - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        sum
    }

    /// The exchange this state induces: who hands how much to whom.
    pub fn flows(&self) -> FlowMatrix {
        let n = self.n();
        let mut flows = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                // amount of good j handed to player i
                flows[i * n + j] = (self.log_fractions[j * n + i] + self.log_amounts[j]).exp();
            }
        }
        FlowMatrix { n, flows }
    }
}

/// One round's exchange: `get(i, j)` is the amount of good `j` handed to
/// player `i`, relative to the state's log offset.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMatrix {
    n: usize,
    flows: Vec<f64>,
}

impl FlowMatrix {
    /// Number of players.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Flow of good `j` to player `i` (offset-relative units).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.n && j < self.n);
        self.flows[i * self.n + j]
    }

    /// Total of good `j` handed out; equals `j`'s offset-relative amount
    /// because fraction rows sum to 1.
    pub fn column_sum(&self, j: usize) -> f64 {
        (0..self.n).map(|i| self.flows[i * self.n + j]).sum()
    }
}

/// A simulated run: the market plus the state at every time `0..=horizon`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    economy: Economy,
    states: Vec<MarketState>,
}

impl Trajectory {
    /// The market that produced this run.
    pub fn economy(&self) -> &Economy {
        &self.economy
    }

    /// All states, indexed by time.
    pub fn states(&self) -> &[MarketState] {
        &self.states
    }

    /// State at time `t`. Panics if `t` is past the horizon.
    pub fn state(&self, t: u64) -> &MarketState {
        &self.states[t as usize]
    }

    /// Final time index (number of steps taken).
    pub fn horizon(&self) -> u64 {
        (self.states.len() - 1) as u64
    }
}

impl Economy {
    /// State at t = 0: raw `ln x(0)` with zero offset, `ln y(0)`.
    pub fn initial_state(&self) -> MarketState {
        let n = self.n();
        let log_amounts: Vec<f64> = self.initial_amounts().iter().map(|x| x.ln()).collect();
        let mut log_fractions = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                log_fractions[i * n + j] = self.initial_fractions()[i][j].ln();
            }
        }
        MarketState {
            t: 0,
            log_amounts,
            log_offset: 0.0,
            log_fractions,
        }
    }

    /// Advances one round. Deterministic: identical inputs give bit-identical
    /// outputs.
    pub fn step(&self, state: &MarketState) -> Result<MarketState, StepError> {
        let n = self.n();
        debug_assert_eq!(state.n(), n, "state size does not match market size");
        let log_values: Vec<f64> = self.values().iter().map(|v| v.ln()).collect();

        // term (i, j) = ln(values[j] * w[i][j]) = ln v_j + ln y[j][i] + ln x_j;
        // stored where ln y[i][j](t+1) will live, then shifted by the log
        // production total.
        let mut next_fractions = vec![0.0; n * n];
        let mut production_log = vec![0.0; n];
        for i in 0..n {
            let row = &mut next_fractions[i * n..(i + 1) * n];
            let mut max_term = f64::NEG_INFINITY;
            for j in 0..n {
                let term = log_values[j] + state.log_fractions[j * n + i] + state.log_amounts[j];
                row[j] = term;
                if term > max_term {
                    max_term = term;
                }
            }
            // Compensated log-sum-exp: the production total drives both the
            // new amount and the normalization of the new fraction row, so it
            // is summed with Kahan compensation. The largest term contributes
            // exactly 1, keeping sum >= 1.
            let mut sum = 0.0;
            let mut comp = 0.0;
            for term in row.iter() {
                let y = (term - max_term).exp() - comp;
                let t = sum + y;
                comp = (t - sum) - y;
                sum = t;
            }
            let log_production = max_term + sum.ln();
            if !log_production.is_finite() {
                return Err(StepError::NonFinite {
                    player: i,
                    t: state.t,
                });
            }
            production_log[i] = log_production;
            for term in row.iter_mut() {
                *term -= log_production;
            }
        }

        // Renormalize so the largest stored amount is exactly 1, pushing the
        // common scale into the offset.
        let shift = production_log[argmax(&production_log)];
        for p in production_log.iter_mut() {
            *p -= shift;
        }

        let next = MarketState {
            t: state.t + 1,
            log_amounts: production_log,
            log_offset: state.log_offset + shift,
            log_fractions: next_fractions,
        };
        debug_assert!(
            (0..n).all(|i| (next.fraction_row_sum(i) - 1.0).abs() <= 1e-12),
            "fraction rows drifted from stochastic after step to t={}",
            next.t
        );
        Ok(next)
    }

    /// Runs `steps` rounds from the initial state and records every state.
    pub fn run(&self, steps: u64) -> Result<Trajectory, StepError> {
        let mut states = Vec::with_capacity(steps as usize + 1);
        states.push(self.initial_state());
        for _ in 0..steps {
            let next = self.step(states.last().expect("at least the initial state"))?;
            states.push(next);
        }
        Ok(Trajectory {
            economy: self.clone(),
            states,
        })
    }
}
