//! Scenario files, seeded random markets, and CSV trajectory export.
//!
//! A scenario is a single JSON document:
//!
//! ```json
//! {
//!   "values": [0.91, 1.186],
//!   "initial_amounts": [1, 1],
//!   "initial_fractions": [[0.95, 0.05], [0.55, 0.45]],
//!   "steps": 250,
//!   "tie_tolerance": 1e-12,
//!   "seed": 7
//! }
//! ```
//!
//! `steps`, `tie_tolerance`, and `seed` are optional; unknown fields are
//! rejected. Number literals are kept verbatim alongside their f64 parse so
//! the exact engine can re-read them as decimals rather than through binary
//! floating point.

use crate::dynamics::Trajectory;
use crate::economy::{Economy, EconomyError};
use crate::numeric::kahan_sum;
use crate::oracle::{OracleError, RationalEconomy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{Number, Value};
use std::io;
use thiserror::Error;

/// Scenario loading and generation failures.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("scenario field {field}{index} is not a usable number")]
    BadNumber { field: &'static str, index: String },
    #[error(transparent)]
    Economy(#[from] EconomyError),
    #[error("value range must satisfy 0 < low <= high with finite bounds; got {low}:{high}")]
    BadValueRange { low: f64, high: f64 },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    values: Vec<Number>,
    initial_amounts: Vec<Number>,
    initial_fractions: Vec<Vec<Number>>,
    #[serde(default)]
    steps: Option<u64>,
    #[serde(default)]
    tie_tolerance: Option<f64>,
    #[serde(default)]
    seed: Option<u64>,
}

/// A loaded scenario: the validated market plus the optional run parameters,
/// with the original number literals retained for the exact engine.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub economy: Economy,
    pub steps: Option<u64>,
    pub tie_tolerance: Option<f64>,
    pub seed: Option<u64>,
    raw_values: Vec<String>,
    raw_amounts: Vec<String>,
    raw_fractions: Vec<Vec<String>>,
}

impl Scenario {
    /// The same market re-read as exact rationals, parsing the scenario's
    /// decimal literals digit by digit.
    pub fn rational_economy(&self) -> Result<RationalEconomy, OracleError> {
        let values: Vec<&str> = self.raw_values.iter().map(String::as_str).collect();
        let amounts: Vec<&str> = self.raw_amounts.iter().map(String::as_str).collect();
        let rows: Vec<Vec<&str>> = self
            .raw_fractions
            .iter()
            .map(|row| row.iter().map(String::as_str).collect())
            .collect();
        let row_slices: Vec<&[&str]> = rows.iter().map(Vec::as_slice).collect();
        RationalEconomy::from_decimal_strs(&values, &amounts, &row_slices)
    }
}

fn numbers_to_f64(field: &'static str, numbers: &[Number]) -> Result<Vec<f64>, ScenarioError> {
    numbers
        .iter()
        .enumerate()
        .map(|(i, number)| {
            number.as_f64().ok_or(ScenarioError::BadNumber {
                field,
                index: format!("[{i}]"),
            })
        })
        .collect()
}

/// Parses and validates a scenario document.
pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile = serde_json::from_str(text)?;
    let values = numbers_to_f64("values", &file.values)?;
    let amounts = numbers_to_f64("initial_amounts", &file.initial_amounts)?;
    let fractions = file
        .initial_fractions
        .iter()
        .map(|row| numbers_to_f64("initial_fractions", row))
        .collect::<Result<Vec<_>, _>>()?;
    let economy = Economy::new(values, amounts, fractions)?;
    Ok(Scenario {
        economy,
        steps: file.steps,
        tie_tolerance: file.tie_tolerance,
        seed: file.seed,
        raw_values: file.values.iter().map(Number::to_string).collect(),
        raw_amounts: file.initial_amounts.iter().map(Number::to_string).collect(),
        raw_fractions: file
            .initial_fractions
            .iter()
            .map(|row| row.iter().map(Number::to_string).collect())
            .collect(),
    })
}

/// Renders a market (plus optional run parameters) as a scenario document.
/// Deterministic, and exact under reload: floats are written in shortest
/// round-trip form.
pub fn scenario_json(
    economy: &Economy,
    steps: Option<u64>,
    tie_tolerance: Option<f64>,
    seed: Option<u64>,
) -> String {
    let float = |x: f64| Value::Number(Number::from_f64(x).expect("market entries are finite"));
    let float_vec = |xs: &[f64]| Value::Array(xs.iter().map(|&x| float(x)).collect());
    let mut map = serde_json::Map::new();
    map.insert("values".to_owned(), float_vec(economy.values()));
    map.insert(
        "initial_amounts".to_owned(),
        float_vec(economy.initial_amounts()),
    );
    map.insert(
        "initial_fractions".to_owned(),
        Value::Array(
            economy
                .initial_fractions()
                .iter()
                .map(|row| float_vec(row))
                .collect(),
        ),
    );
    if let Some(steps) = steps {
        map.insert("steps".to_owned(), steps.into());
    }
    if let Some(tol) = tie_tolerance {
        map.insert("tie_tolerance".to_owned(), float(tol));
    }
    if let Some(seed) = seed {
        map.insert("seed".to_owned(), seed.into());
    }
    let mut text =
        serde_json::to_string_pretty(&Value::Object(map)).expect("scenario maps serialize");
    text.push('\n');
    text
}

/// Draws a random market, reproducibly: ChaCha8 seeded with `seed` (via the
/// standard SplitMix64 expansion), values uniform in `[value_low,
/// value_high]`, all starting amounts 1, and each fraction row uniform on the
/// simplex (independent standard-exponential draws, normalized). The same
/// `(n, seed, bounds)` always produces the same market.
pub fn generate_random(
    n: usize,
    seed: u64,
    value_low: f64,
    value_high: f64,
) -> Result<Economy, ScenarioError> {
    if !(value_low.is_finite()
        && value_high.is_finite()
        && value_low > 0.0
        && value_low <= value_high)
    {
        return Err(ScenarioError::BadValueRange {
            low: value_low,
            high: value_high,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = value_high - value_low;
    let values: Vec<f64> = (0..n)
        .map(|_| value_low + span * rng.random::<f64>())
        .collect();
    let mut fractions = Vec::with_capacity(n);
    for _ in 0..n {
        let mut row: Vec<f64> = (0..n).map(|_| standard_exponential(&mut rng)).collect();
        let sum = kahan_sum(&row);
        for y in &mut row {
            *y /= sum;
        }
        fractions.push(row);
    }
    Ok(Economy::new(values, vec![1.0; n], fractions)?)
}

/// Inverse-CDF standard exponential: `-ln(u)` with `u` uniform in (0, 1).
/// The measure-zero draw `u = 0` is rejected so results stay strictly
/// positive.
fn standard_exponential<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return -u.ln();
        }
    }
}

/// Writes a trajectory in long CSV form with header `t,kind,i,j,value`:
/// per state, `log_amount` rows (`j` empty, value = ln x_i(t)) then
/// `fraction` rows (value = y_ij(t)), each in ascending index order. Floats
/// carry 17 significant digits, so the output is byte-identical across runs
/// and reloads losslessly.
pub fn save_trajectory_csv<W: io::Write>(traj: &Trajectory, mut out: W) -> io::Result<()> {
    writeln!(out, "t,kind,i,j,value")?;
    for state in traj.states() {
        let t = state.t();
        let n = state.n();
        for i in 0..n {
            writeln!(out, "{t},log_amount,{i},,{:.16e}", state.amount_log(i))?;
        }
        for i in 0..n {
            for j in 0..n {
                writeln!(out, "{t},fraction,{i},{j},{:.16e}", state.fraction(i, j))?;
            }
        }
    }
    Ok(())
}
