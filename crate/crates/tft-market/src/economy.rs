//! Market description: who produces what, how goods are valued, and how each
//! player initially splits its output across the goods.
//!
//! Player `i` produces good `i`. One unit of good `j` is worth `values[j]`
//! units of production to whoever receives it, the same for every receiver.
//! Row `i` of the fraction matrix is player `i`'s spending split and must sum
//! to 1; all quantities are strictly positive.

use crate::numeric::{argmax, kahan_sum};
use thiserror::Error;

/// How far a fraction row's sum may deviate from 1 before the input is
/// rejected instead of renormalized.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Rejected market descriptions, each pointing at the offending entry.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EconomyError {
    #[error("market must have at least one player")]
    Empty,
    #[error("{what} has length {got}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("fraction row {row} has length {got}, expected {expected}")]
    FractionRowLength {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("values[{index}] = {value} is not a strictly positive finite number")]
    NonPositiveValue { index: usize, value: f64 },
    #[error("initial_amounts[{index}] = {value} is not a strictly positive finite number")]
    NonPositiveAmount { index: usize, value: f64 },
    #[error("initial_fractions[{row}][{col}] = {value} is not a strictly positive finite number")]
    NonPositiveFraction { row: usize, col: usize, value: f64 },
    #[error("fraction row {row} sums to {sum}, more than {ROW_SUM_TOLERANCE:e} away from 1")]
    RowSumOutOfTolerance { row: usize, sum: f64 },
    #[error("player {player} is out of range for a market of {n} players")]
    PlayerOutOfRange { player: usize, n: usize },
}

/// A validated production market. Construction is the only way to obtain one,
/// so every `Economy` in flight has positive entries and fraction rows that
/// sum to exactly 1.0.
#[derive(Debug, Clone, PartialEq)]
pub struct Economy {
    values: Vec<f64>,
    initial_amounts: Vec<f64>,
    initial_fractions: Vec<Vec<f64>>,
}

impl Economy {
    /// Validates and assembles a market. Fraction rows whose sum is within
    /// [`ROW_SUM_TOLERANCE`] of 1 are renormalized to sum exactly 1.0; rows
    /// further out are a hard error. A zero amount or fraction is rejected
    /// rather than treated as a vanished player.
    pub fn new(
        values: Vec<f64>,
        initial_amounts: Vec<f64>,
        initial_fractions: Vec<Vec<f64>>,
    ) -> Result<Self, EconomyError> {
        let n = values.len();
        if n == 0 {
            return Err(EconomyError::Empty);
        }
        if initial_amounts.len() != n {
            return Err(EconomyError::DimensionMismatch {
                what: "initial_amounts",
                expected: n,
                got: initial_amounts.len(),
            });
        }
        if initial_fractions.len() != n {
            return Err(EconomyError::DimensionMismatch {
                what: "initial_fractions",
                expected: n,
                got: initial_fractions.len(),
            });
        }
        for (index, &value) in values.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(EconomyError::NonPositiveValue { index, value });
            }
        }
        for (index, &value) in initial_amounts.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(EconomyError::NonPositiveAmount { index, value });
            }
        }
        let mut fractions = initial_fractions;
        for (row, r) in fractions.iter_mut().enumerate() {
            if r.len() != n {
                return Err(EconomyError::FractionRowLength {
                    row,
                    expected: n,
                    got: r.len(),
                });
            }
            for (col, &value) in r.iter().enumerate() {
                if !(value.is_finite() && value > 0.0) {
                    return Err(EconomyError::NonPositiveFraction { row, col, value });
                }
            }
            let sum = kahan_sum(r);
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(EconomyError::RowSumOutOfTolerance { row, sum });
            }
            renormalize_row(r);
        }
        Ok(Economy {
            values,
            initial_amounts,
            initial_fractions: fractions,
        })
    }

    /// Number of players (= number of goods).
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Per-unit good values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value of good `i`.
    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// The best per-unit value in the market, `max_j values[j]`.
    pub fn max_value(&self) -> f64 {
        self.values[argmax(&self.values)]
    }

    /// Index of a best-valued good, ties broken toward the lowest index.
    pub fn best_good(&self) -> usize {
        argmax(&self.values)
    }

    /// Starting amounts, one per player.
    pub fn initial_amounts(&self) -> &[f64] {
        &self.initial_amounts
    }

    /// Starting spending splits; row `i` sums to exactly 1.0.
    pub fn initial_fractions(&self) -> &[Vec<f64>] {
        &self.initial_fractions
    }

    /// Copy of this market with `values[player]` replaced, revalidated.
    pub fn with_value(&self, player: usize, value: f64) -> Result<Self, EconomyError> {
        if player >= self.n() {
            return Err(EconomyError::PlayerOutOfRange {
                player,
                n: self.n(),
            });
        }
        let mut values = self.values.clone();
        values[player] = value;
        Economy::new(
            values,
            self.initial_amounts.clone(),
            self.initial_fractions.clone(),
        )
    }
}

/// Scales a near-stochastic row so its compensated sum is exactly 1.0:
/// divide by the current sum, then push the ulp-sized residual onto the
/// largest entry until the sum lands on 1. Idempotent, so re-validating an
/// already-normalized row leaves it bit-identical.
fn renormalize_row(row: &mut [f64]) {
    let sum = kahan_sum(row);
    if sum != 1.0 {
        for x in row.iter_mut() {
            *x /= sum;
        }
    }
    for _ in 0..4 {
        let sum = kahan_sum(row);
        if sum == 1.0 {
            return;
        }
        row[argmax(row)] += 1.0 - sum;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_two_player() -> Economy {
        Economy::new(
            vec![1.0, 2.0],
            vec![1.0, 1.0],
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        )
        .unwrap()
    }

    #[test]
    fn accepts_well_formed_market() {
        let e = uniform_two_player();
        assert_eq!(e.n(), 2);
        assert_eq!(e.max_value(), 2.0);
        assert_eq!(e.best_good(), 1);
    }

    #[test]
    fn rejects_empty_market() {
        assert_eq!(
            Economy::new(vec![], vec![], vec![]),
            Err(EconomyError::Empty)
        );
    }

    #[test]
    fn rejects_dimension_mismatches() {
        let err = Economy::new(vec![1.0, 2.0], vec![1.0], vec![vec![1.0], vec![1.0]]).unwrap_err();
        assert_eq!(
            err,
            EconomyError::DimensionMismatch {
                what: "initial_amounts",
                expected: 2,
                got: 1
            }
        );
        let err = Economy::new(
            vec![1.0, 2.0],
            vec![1.0, 1.0],
            vec![vec![0.5, 0.5], vec![1.0]],
        )
        .unwrap_err();
        assert_eq!(
            err,
            EconomyError::FractionRowLength {
                row: 1,
                expected: 2,
                got: 1
            }
        );
    }

    #[test]
    fn rejects_nonpositive_entries_with_index() {
        let err = Economy::new(
            vec![1.0, -2.0],
            vec![1.0, 1.0],
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        )
        .unwrap_err();
        assert_eq!(
            err,
            EconomyError::NonPositiveValue {
                index: 1,
                value: -2.0
            }
        );

        // A zero starting amount is degenerate, not a valid vanished player.
        let err = Economy::new(
            vec![1.0, 2.0],
            vec![0.0, 1.0],
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        )
        .unwrap_err();
        assert_eq!(
            err,
            EconomyError::NonPositiveAmount {
                index: 0,
                value: 0.0
            }
        );

        let err = Economy::new(
            vec![1.0, 2.0],
            vec![1.0, 1.0],
            vec![vec![0.5, 0.5], vec![1.0, 0.0]],
        )
        .unwrap_err();
        assert_eq!(
            err,
            EconomyError::NonPositiveFraction {
                row: 1,
                col: 1,
                value: 0.0
            }
        );

        // Non-finite entries are caught by the same guards.
        let err = Economy::new(
            vec![f64::INFINITY, 2.0],
            vec![1.0, 1.0],
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            EconomyError::NonPositiveValue { index: 0, .. }
        ));
    }

    #[test]
    fn rejects_row_sum_far_from_one() {
        let err = Economy::new(
            vec![1.0, 2.0],
            vec![1.0, 1.0],
            vec![vec![0.6, 0.5], vec![0.5, 0.5]],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            EconomyError::RowSumOutOfTolerance { row: 0, .. }
        ));
    }

    #[test]
    fn renormalizes_near_stochastic_rows_to_exact_sum() {
        // 0.3 + 0.3 + 0.4 misses 1.0 by an ulp-scale amount in binary; the row
        // must come out summing to exactly 1.0.
        let e = Economy::new(
            vec![1.0, 1.0, 1.0],
            vec![1.0, 1.0, 1.0],
            vec![
                vec![0.3, 0.3, 0.4],
                vec![0.2, 0.2, 0.6 + 5e-10],
                vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            ],
        )
        .unwrap();
        for row in e.initial_fractions() {
            assert_eq!(kahan_sum(row), 1.0, "row {row:?}");
        }
    }

    #[test]
    fn renormalization_is_idempotent() {
        let e = Economy::new(
            vec![1.0, 2.0],
            vec![1.0, 1.0],
            vec![vec![0.95, 0.05], vec![0.55, 0.45]],
        )
        .unwrap();
        let again = Economy::new(
            e.values().to_vec(),
            e.initial_amounts().to_vec(),
            e.initial_fractions().to_vec(),
        )
        .unwrap();
        assert_eq!(e, again);
    }

    #[test]
    fn with_value_replaces_and_revalidates() {
        let e = uniform_two_player();
        let e2 = e.with_value(0, 3.0).unwrap();
        assert_eq!(e2.values(), &[3.0, 2.0]);
        assert_eq!(e2.best_good(), 0);
        assert!(matches!(
            e.with_value(5, 1.0),
            Err(EconomyError::PlayerOutOfRange { player: 5, n: 2 })
        ));
        assert!(e.with_value(0, -1.0).is_err());
    }
}
