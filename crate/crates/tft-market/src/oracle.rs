//! Exact mirror of the trading round in arbitrary-precision rationals.
//!
//! This is the ground truth the floating-point engine is measured against:
//! the same exchange / production / reciprocation round, but carried in
//! `BigRational` with no rescaling and no rounding, so every conservation law
//! holds with literally zero residual. Decimal inputs are parsed digit by
//! digit (`0.91` becomes `91/100`), never routed through binary floating
//! point, so the ground truth does not depend on f64 parsing.
//!
//! Exact state sizes grow with the horizon. The engine is intended for small
//! markets and short horizons — up to about 5 players and 40 rounds — which
//! is ample for cross-checking the float engine; beyond that the rationals
//! get expensive.

use crate::dynamics::Trajectory;
use crate::economy::Economy;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Largest decimal exponent magnitude accepted by the parser; anything
/// further out is a typo, not a market.
const MAX_DECIMAL_EXPONENT: i64 = 1_000_000;

/// Failures in the exact engine or its input parsing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("cannot parse {input:?} as a decimal number")]
    DecimalParse { input: String },
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
    #[error("values[{index}] = {value} is not strictly positive")]
    NonPositiveValue { index: usize, value: String },
    #[error("initial_amounts[{index}] = {value} is not strictly positive")]
    NonPositiveAmount { index: usize, value: String },
    #[error("initial_fractions[{row}][{col}] = {value} is not strictly positive")]
    NonPositiveFraction {
        row: usize,
        col: usize,
        value: String,
    },
    #[error("fraction row {row} sums to {sum}, more than 1e-9 away from 1")]
    RowSumOutOfTolerance { row: usize, sum: String },
    #[error("trajectories have different shapes: {detail}")]
    ShapeMismatch { detail: String },
}

/// Parses a decimal literal (`-12`, `0.91`, `1.5e-3`) into an exact rational.
pub fn parse_decimal(input: &str) -> Result<BigRational, OracleError> {
    let fail = || OracleError::DecimalParse {
        input: input.to_owned(),
    };
    let (mantissa, exponent) = match input.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = input[pos + 1..].parse().map_err(|_| fail())?;
            if exp.abs() > MAX_DECIMAL_EXPONENT {
                return Err(fail());
            }
            (&input[..pos], exp)
        }
        None => (input, 0),
    };
    let (negative, unsigned) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = match unsigned.split_once('.') {
        Some((i, f)) => (i, f),
        None => (unsigned, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(fail());
    }
    let all_digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) {
        return Err(fail());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::parse_bytes(digits.as_bytes(), 10).ok_or_else(fail)?;
    if negative {
        numer = -numer;
    }
    let net_exponent = exponent - frac_part.len() as i64;
    Ok(if net_exponent >= 0 {
        BigRational::from(numer * pow10(net_exponent as u64))
    } else {
        BigRational::new(numer, pow10((-net_exponent) as u64))
    })
}

fn pow10(k: u64) -> BigInt {
    let mut r = BigInt::one();
    for _ in 0..k {
        r *= 10;
    }
    r
}

/// A market with exact rational entries; the same validation contract as
/// [`Economy`], but checked exactly. Fraction rows end up summing to exactly
/// 1 (renormalized when within 1e-9, rejected beyond).
#[derive(Debug, Clone, PartialEq)]
pub struct RationalEconomy {
    values: Vec<BigRational>,
    initial_amounts: Vec<BigRational>,
    initial_fractions: Vec<Vec<BigRational>>,
}

/// Exact market state at time `t`. No offsets, no normalization: plain
/// amounts and fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalState {
    pub t: u64,
    pub amounts: Vec<BigRational>,
    pub fractions: Vec<Vec<BigRational>>,
}

impl RationalEconomy {
    /// Validates and assembles an exact market.
    pub fn new(
        values: Vec<BigRational>,
        initial_amounts: Vec<BigRational>,
        initial_fractions: Vec<Vec<BigRational>>,
    ) -> Result<Self, OracleError> {
        let n = values.len();
        if n == 0 {
            return Err(OracleError::Empty);
        }
        if initial_amounts.len() != n {
            return Err(OracleError::DimensionMismatch {
                what: "initial_amounts",
                expected: n,
                got: initial_amounts.len(),
            });
        }
        if initial_fractions.len() != n {
            return Err(OracleError::DimensionMismatch {
                what: "initial_fractions",
                expected: n,
                got: initial_fractions.len(),
            });
        }
        for (index, v) in values.iter().enumerate() {
            if !v.is_positive() {
                return Err(OracleError::NonPositiveValue {
                    index,
                    value: v.to_string(),
                });
            }
        }
        for (index, x) in initial_amounts.iter().enumerate() {
            if !x.is_positive() {
                return Err(OracleError::NonPositiveAmount {
                    index,
                    value: x.to_string(),
                });
            }
        }
        let tolerance = BigRational::new(BigInt::one(), pow10(9));
        let one = BigRational::one();
        let mut fractions = initial_fractions;
        for (row, r) in fractions.iter_mut().enumerate() {
            if r.len() != n {
                return Err(OracleError::FractionRowLength {
                    row,
                    expected: n,
                    got: r.len(),
                });
            }
            for (col, y) in r.iter().enumerate() {
                if !y.is_positive() {
                    return Err(OracleError::NonPositiveFraction {
                        row,
                        col,
                        value: y.to_string(),
                    });
                }
            }
            let sum: BigRational = r.iter().sum();
            if sum != one {
                if (&sum - &one).abs() > tolerance {
                    return Err(OracleError::RowSumOutOfTolerance {
                        row,
                        sum: sum.to_string(),
                    });
                }
                for y in r.iter_mut() {
                    *y /= &sum;
                }
            }
        }
        Ok(RationalEconomy {
            values,
            initial_amounts,
            initial_fractions: fractions,
        })
    }

    /// Builds an exact market from decimal literals.
    pub fn from_decimal_strs(
        values: &[&str],
        initial_amounts: &[&str],
        initial_fractions: &[&[&str]],
    ) -> Result<Self, OracleError> {
        let parse_all = |xs: &[&str]| -> Result<Vec<BigRational>, OracleError> {
            xs.iter().map(|s| parse_decimal(s)).collect()
        };
        RationalEconomy::new(
            parse_all(values)?,
            parse_all(initial_amounts)?,
            initial_fractions
                .iter()
                .map(|row| parse_all(row))
                .collect::<Result<_, _>>()?,
        )
    }

    /// Converts a float market exactly (every f64 is a rational) and then
    /// renormalizes rows exactly. The result starts within an ulp of the
    /// float engine's starting point.
    pub fn from_economy(economy: &Economy) -> Result<Self, OracleError> {
        let exact = |x: f64| BigRational::from_float(x).expect("validated markets are finite");
        RationalEconomy::new(
            economy.values().iter().map(|&v| exact(v)).collect(),
            economy
                .initial_amounts()
                .iter()
                .map(|&x| exact(x))
                .collect(),
            economy
                .initial_fractions()
                .iter()
                .map(|row| row.iter().map(|&y| exact(y)).collect())
                .collect(),
        )
    }

    /// Number of players.
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Per-unit good values.
    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    /// Exact state at t = 0.
    pub fn initial_state(&self) -> RationalState {
        RationalState {
            t: 0,
            amounts: self.initial_amounts.clone(),
            fractions: self.initial_fractions.clone(),
        }
    }

    /// Runs `steps` exact rounds and records every state. See the module
    /// notes for the practical size envelope.
    pub fn run_exact(&self, steps: u64) -> Vec<RationalState> {
        let n = self.n();
        let mut states = Vec::with_capacity(steps as usize + 1);
        states.push(self.initial_state());
        for _ in 0..steps {
            let cur = states.last().expect("at least the initial state");
            let mut amounts = Vec::with_capacity(n);
            let mut fractions = Vec::with_capacity(n);
            for i in 0..n {
                // received value per good: v_j * y[j][i] * x_j
                let row: Vec<BigRational> = (0..n)
                    .map(|j| &self.values[j] * &cur.fractions[j][i] * &cur.amounts[j])
                    .collect();
                let total: BigRational = row.iter().sum();
                fractions.push(row.into_iter().map(|value| value / &total).collect());
                amounts.push(total);
            }
            states.push(RationalState {
                t: cur.t + 1,
                amounts,
                fractions,
            });
        }
        states
    }
}

/// Max exact residual of the potential law
/// `x[i](t) * y[i][i](t) = values[i]^t * x[i](0) * y[i][i](0)`.
/// Zero on every trajectory the exact engine produces.
pub fn potential_residual_exact(
    economy: &RationalEconomy,
    states: &[RationalState],
) -> BigRational {
    let n = economy.n();
    let base: Vec<BigRational> = (0..n)
        .map(|i| &states[0].amounts[i] * &states[0].fractions[i][i])
        .collect();
    let mut power: Vec<BigRational> = vec![BigRational::one(); n];
    let mut worst = BigRational::zero();
    for state in states {
        for (i, (p, b)) in power.iter().zip(&base).enumerate() {
            let g = &state.amounts[i] * &state.fractions[i][i];
            let residual = (g - p * b).abs();
            if residual > worst {
                worst = residual;
            }
        }
        for (p, v) in power.iter_mut().zip(&economy.values) {
            *p *= v;
        }
    }
    worst
}

/// Max exact residual of the two-step identity
/// `y[i][j](t+1) * x[i](t+1) = v_i * v_j * y[i][j](t-1) * x[i](t-1)`.
pub fn two_step_residual_exact(economy: &RationalEconomy, states: &[RationalState]) -> BigRational {
    let n = economy.n();
    let mut worst = BigRational::zero();
    for window in states.windows(3) {
        let (prev, next) = (&window[0], &window[2]);
        for i in 0..n {
            for j in 0..n {
                let lhs = &next.fractions[i][j] * &next.amounts[i];
                let rhs = &economy.values[i]
                    * &economy.values[j]
                    * &prev.fractions[i][j]
                    * &prev.amounts[i];
                let residual = (lhs - rhs).abs();
                if residual > worst {
                    worst = residual;
                }
            }
        }
    }
    worst
}

/// Max exact residual of the parity-anchored conserved products
/// `x[i](t) * y[i][j](t) = (v_i v_j)^l * x[i](anchor) * y[i][j](anchor)`.
pub fn conserved_product_residual_exact(
    economy: &RationalEconomy,
    states: &[RationalState],
) -> BigRational {
    let n = economy.n();
    let mut worst = BigRational::zero();
    for anchor in 0..states.len().min(2) {
        let anchor_state = &states[anchor];
        let base: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| &anchor_state.amounts[i] * &anchor_state.fractions[i][j])
                    .collect()
            })
            .collect();
        let mut power: Vec<Vec<BigRational>> = vec![vec![BigRational::one(); n]; n];
        for state in states[anchor..].iter().step_by(2) {
            for (i, (prow, brow)) in power.iter().zip(&base).enumerate() {
                for (j, (p, b)) in prow.iter().zip(brow).enumerate() {
                    let lhs = &state.amounts[i] * &state.fractions[i][j];
                    let residual = (lhs - p * b).abs();
                    if residual > worst {
                        worst = residual;
                    }
                }
            }
            for (prow, vi) in power.iter_mut().zip(&economy.values) {
                for (p, vj) in prow.iter_mut().zip(&economy.values) {
                    *p *= vi * vj;
                }
            }
        }
    }
    worst
}

/// Max exact deviation of any fraction row sum from 1.
pub fn row_sum_residual_exact(states: &[RationalState]) -> BigRational {
    let one = BigRational::one();
    let mut worst = BigRational::zero();
    for state in states {
        for row in &state.fractions {
            let sum: BigRational = row.iter().sum();
            let residual = (sum - &one).abs();
            if residual > worst {
                worst = residual;
            }
        }
    }
    worst
}

/// Max exact deviation of an exchange column total from the good's stock:
/// handing out `y[j][i] * x_j` across receivers must spend exactly `x_j`.
pub fn flow_conservation_residual_exact(states: &[RationalState]) -> BigRational {
    let mut worst = BigRational::zero();
    for state in states {
        let n = state.amounts.len();
        for j in 0..n {
            let handed_out: BigRational = (0..n)
                .map(|i| &state.fractions[j][i] * &state.amounts[j])
                .sum();
            let residual = (handed_out - &state.amounts[j]).abs();
            if residual > worst {
                worst = residual;
            }
        }
    }
    worst
}

/// Result of comparing a float trajectory against the exact engine.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    /// Max |Δ ln x| over all players and times — the relative error of the
    /// amounts, measured in log space.
    pub max_log_amount_error: f64,
    /// Max |Δ y| over all fractions and times, compared directly.
    pub max_fraction_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares an exact run against a float run state by state. Errors when the
/// shapes (market size or horizon) differ.
pub fn compare(
    exact: &[RationalState],
    traj: &Trajectory,
    tolerance: f64,
) -> Result<OracleComparison, OracleError> {
    let float_states = traj.states();
    if exact.len() != float_states.len() {
        return Err(OracleError::ShapeMismatch {
            detail: format!(
                "exact run has {} states, float run has {}",
                exact.len(),
                float_states.len()
            ),
        });
    }
    let n = traj.economy().n();
    let mut max_log_amount_error = 0.0f64;
    let mut max_fraction_error = 0.0f64;
    for (es, fs) in exact.iter().zip(float_states) {
        if es.amounts.len() != n {
            return Err(OracleError::ShapeMismatch {
                detail: format!(
                    "exact state at t={} has {} players, float run has {n}",
                    es.t,
                    es.amounts.len()
                ),
            });
        }
        for i in 0..n {
            let err = (ln_rational(&es.amounts[i]) - fs.amount_log(i)).abs();
            max_log_amount_error = max_log_amount_error.max(err);
            for j in 0..n {
                let err = (rational_to_f64(&es.fractions[i][j]) - fs.fraction(i, j)).abs();
                max_fraction_error = max_fraction_error.max(err);
            }
        }
    }
    let passed = max_log_amount_error <= tolerance && max_fraction_error <= tolerance;
    Ok(OracleComparison {
        max_log_amount_error,
        max_fraction_error,
        tolerance,
        passed,
    })
}

/// Natural log of a positive rational, accurate to a few ulps even when the
/// numerator and denominator are far too large for f64.
pub fn ln_rational(r: &BigRational) -> f64 {
    assert!(r.is_positive(), "ln of a non-positive rational");
    ln_magnitude(r.numer()) - ln_magnitude(r.denom())
}

fn ln_magnitude(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 512 {
        return n.to_f64().expect("fits in f64 range").ln();
    }
    // ln(top 64 bits) + (discarded bits) * ln 2; the truncation error is
    // below 2^-63 in relative terms.
    let shift = bits - 64;
    let top: BigInt = n >> shift;
    top.to_f64().expect("64-bit top fits").ln() + shift as f64 * std::f64::consts::LN_2
}

/// Nearest-f64 conversion that stays accurate for rationals whose parts
/// overflow f64 (huge numerators/denominators of similar size).
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let negative = r.is_negative();
    let numer = r.numer().magnitude();
    let denom = r.denom().magnitude();
    let nb = numer.bits() as i64;
    let db = denom.bits() as i64;
    let magnitude = if nb <= 512 && db <= 512 {
        numer.to_f64().expect("fits") / denom.to_f64().expect("fits")
    } else {
        // Shift so the integer quotient carries ~64 significant bits, then
        // undo the shift with an exact power of two.
        let s = db - nb + 64;
        let q = if s >= 0 {
            (numer << s as u64) / denom
        } else {
            numer / (denom << (-s) as u64)
        };
        q.to_f64().expect("64-bit quotient fits") * 2.0f64.powi(-s as i32)
    };
    if negative {
        -magnitude
    } else {
        magnitude
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn uniform_two_player() -> RationalEconomy {
        RationalEconomy::from_decimal_strs(
            &["1", "2"],
            &["1", "1"],
            &[&["0.5", "0.5"], &["0.5", "0.5"]],
        )
        .unwrap()
    }

    fn three_player_mixed() -> RationalEconomy {
        RationalEconomy::from_decimal_strs(
            &["1.61", "0.03", "1.51"],
            &["1", "1", "1"],
            &[
                &["0.54", "0.2", "0.26"],
                &["0.32", "0.31", "0.37"],
                &["0.07", "0.54", "0.39"],
            ],
        )
        .unwrap()
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_decimal("0.91").unwrap(), rat(91, 100));
        assert_eq!(parse_decimal("2").unwrap(), rat(2, 1));
        assert_eq!(parse_decimal("-0.25").unwrap(), rat(-1, 4));
        assert_eq!(parse_decimal("1.5e-3").unwrap(), rat(3, 2000));
        assert_eq!(parse_decimal("12e2").unwrap(), rat(1200, 1));
        assert_eq!(parse_decimal("+0.5E1").unwrap(), rat(5, 1));
        assert_eq!(parse_decimal("0.030").unwrap(), rat(3, 100));
    }

    #[test]
    fn rejects_malformed_decimals() {
        for bad in ["", ".", "1.2.3", "abc", "0x10", "1e", "--2", "1e999999999"] {
            assert!(parse_decimal(bad).is_err(), "{bad:?} should not parse");
        }
    }

    #[test]
    fn two_exact_steps_by_hand() {
        let states = uniform_two_player().run_exact(2);
        assert_eq!(states[1].amounts, vec![rat(3, 2), rat(3, 2)]);
        assert_eq!(states[1].fractions[0], vec![rat(1, 3), rat(2, 3)]);
        assert_eq!(states[2].amounts, vec![rat(3, 2), rat(3, 1)]);
        assert_eq!(states[2].fractions[0][1], rat(2, 3));
        // Potential of player 1 at t = 2: 3 * (2/3) = 2 = v_1^2 * 1 * 0.5.
        assert_eq!(
            &states[2].amounts[1] * &states[2].fractions[1][1],
            rat(2, 1)
        );
    }

    #[test]
    fn single_player_compounds_exactly() {
        let e = RationalEconomy::from_decimal_strs(&["1.5"], &["1"], &[&["1"]]).unwrap();
        let states = e.run_exact(4);
        assert_eq!(states[4].amounts[0], rat(81, 16));
    }

    #[test]
    fn identities_hold_with_zero_residual() {
        for (economy, steps) in [(uniform_two_player(), 6), (three_player_mixed(), 8)] {
            let states = economy.run_exact(steps);
            assert!(potential_residual_exact(&economy, &states).is_zero());
            assert!(two_step_residual_exact(&economy, &states).is_zero());
            assert!(conserved_product_residual_exact(&economy, &states).is_zero());
            assert!(row_sum_residual_exact(&states).is_zero());
            assert!(flow_conservation_residual_exact(&states).is_zero());
        }
    }

    #[test]
    fn near_stochastic_rows_renormalize_exactly() {
        // 0.3 + 0.3 + 0.4000000001 is within 1e-9 of 1: scaled to sum exactly 1.
        let e = RationalEconomy::from_decimal_strs(
            &["1", "1", "1"],
            &["1", "1", "1"],
            &[
                &["0.3", "0.3", "0.4000000001"],
                &["0.2", "0.2", "0.6"],
                &["0.4", "0.4", "0.2"],
            ],
        )
        .unwrap();
        let sum: BigRational = e.initial_state().fractions[0].iter().sum();
        assert!(sum.is_one());
        // Further out: rejected.
        let err = RationalEconomy::from_decimal_strs(
            &["1", "1"],
            &["1", "1"],
            &[&["0.6", "0.5"], &["0.5", "0.5"]],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            OracleError::RowSumOutOfTolerance { row: 0, .. }
        ));
    }

    #[test]
    fn from_economy_is_exact_per_entry() {
        let economy = Economy::new(
            vec![0.91, 1.186],
            vec![1.0, 1.0],
            vec![vec![0.95, 0.05], vec![0.55, 0.45]],
        )
        .unwrap();
        let exact = RationalEconomy::from_economy(&economy).unwrap();
        // 1.0 converts to exactly 1; 0.91 converts to its binary value, which
        // is close to but not equal to 91/100.
        assert!(exact.values()[0] != rat(91, 100));
        let diff = (&exact.values()[0] - rat(91, 100)).abs();
        assert!(diff < rat(1, 1_000_000_000_000_000));
        let row_sum: BigRational = exact.initial_state().fractions[0].iter().sum();
        assert!(row_sum.is_one());
    }

    #[test]
    fn compare_is_zero_on_a_fixed_point() {
        // v = 1, single player: both engines sit at x = 1, y = 1 forever.
        let float = Economy::new(vec![1.0], vec![1.0], vec![vec![1.0]]).unwrap();
        let exact = RationalEconomy::from_economy(&float).unwrap();
        let traj = float.run(10).unwrap();
        let report = compare(&exact.run_exact(10), &traj, 0.0).unwrap();
        assert_eq!(report.max_log_amount_error, 0.0);
        assert_eq!(report.max_fraction_error, 0.0);
        assert!(report.passed);
    }

    #[test]
    fn compare_tracks_the_float_engine_closely() {
        let float = Economy::new(
            vec![1.61, 0.03, 1.51],
            vec![1.0, 1.0, 1.0],
            vec![
                vec![0.54, 0.2, 0.26],
                vec![0.32, 0.31, 0.37],
                vec![0.07, 0.54, 0.39],
            ],
        )
        .unwrap();
        let exact = three_player_mixed();
        let traj = float.run(30).unwrap();
        let report = compare(&exact.run_exact(30), &traj, 1e-9).unwrap();
        assert!(
            report.passed,
            "log amounts {:e}, fractions {:e}",
            report.max_log_amount_error, report.max_fraction_error
        );
    }

    #[test]
    fn compare_rejects_shape_mismatch() {
        let float = Economy::new(vec![1.0], vec![1.0], vec![vec![1.0]]).unwrap();
        let exact = RationalEconomy::from_economy(&float).unwrap();
        let traj = float.run(5).unwrap();
        assert!(matches!(
            compare(&exact.run_exact(4), &traj, 1e-9),
            Err(OracleError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn big_rational_helpers_stay_accurate() {
        // 2^200 / 3^100: parts overflow nothing, but exercise both paths.
        let two_pow = BigInt::from(2).pow(200u32);
        let three_pow = BigInt::from(3).pow(100u32);
        let r = BigRational::new(two_pow.clone(), three_pow.clone());
        let expected = 200.0 * std::f64::consts::LN_2 - 100.0 * 3.0f64.ln();
        assert!((ln_rational(&r) - expected).abs() < 1e-10);
        // Huge but balanced: 3^2000 / (3^2000 + small) is near 1.
        let huge = BigInt::from(3).pow(2000u32);
        let r = BigRational::new(huge.clone(), huge + BigInt::one());
        assert!((rational_to_f64(&r) - 1.0).abs() < 1e-12);
        assert!(ln_rational(&r).abs() < 1e-12);
        let tiny = BigRational::new(BigInt::one(), BigInt::from(3).pow(2000u32));
        assert_eq!(rational_to_f64(&tiny), 0.0); // underflows f64, as it must
        assert!((ln_rational(&tiny) + 2000.0 * 3.0f64.ln()).abs() < 1e-9);
    }
}
