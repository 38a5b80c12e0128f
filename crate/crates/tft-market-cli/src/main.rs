//! Command-line front end for the exchange-market simulator: run scenarios to
//! CSV, classify players' long-run fates, verify runs against structural
//! identities and exact rational arithmetic, sweep a player's value across
//! the growth threshold, and generate seeded random scenarios.
//!
//! Exit codes: 0 success, 1 invalid input (bad scenario, bad market, bad
//! grid), 2 I/O failure (and clap usage errors), 3 verification failure.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tft_market::{
    bound_constants, check_amount_bounds, check_conserved_product, check_fraction_decay_envelope,
    check_optimal_ratio_invariance, check_potential_law, check_two_step_identity, classify,
    compare, conserved_product_residual_exact, flow_conservation_residual_exact, generate_random,
    load_scenario, potential_residual_exact, rational_to_f64, row_sum_residual_exact,
    save_trajectory_csv, scenario_json, sweep, two_step_residual_exact, Scenario, Trajectory,
    DEFAULT_TIE_TOLERANCE,
};

/// Rounds to run when neither the flag nor the scenario says.
const DEFAULT_SIM_STEPS: u64 = 100;
/// Sweeps need long horizons for the measured exponent to settle.
const DEFAULT_SWEEP_STEPS: u64 = 2000;

#[derive(Parser)]
#[command(
    name = "tft-market",
    version,
    about = "Simulate and verify tit-for-tat exchange markets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write the trajectory as CSV.
    Simulate(SimulateArgs),
    /// Print each player's long-run phase (grows / vanishes / bounded).
    Classify(ClassifyArgs),
    /// Re-run a scenario and check every structural identity of the dynamic.
    Verify(VerifyArgs),
    /// Re-run a scenario across a grid of values for one player.
    Sweep(SweepArgs),
    /// Generate a seeded random scenario.
    Gen(GenArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario file to run.
    #[arg(long)]
    scenario: PathBuf,
    /// Rounds to simulate; defaults to the scenario's `steps`, then 100.
    #[arg(long)]
    steps: Option<u64>,
    /// Write here instead of stdout (atomically: temp file, then rename).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Scenario file to classify.
    #[arg(long)]
    scenario: PathBuf,
    /// Dead-band width around the growth threshold; defaults to the
    /// scenario's `tie_tolerance`, then 1e-12.
    #[arg(long = "tie-tol")]
    tie_tol: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Scenario file to verify.
    #[arg(long)]
    scenario: PathBuf,
    /// Rounds to simulate; defaults to the scenario's `steps`, then 100.
    #[arg(long)]
    steps: Option<u64>,
    /// Largest residual any float-side check may leave.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Dead-band width around the growth threshold; defaults to the
    /// scenario's `tie_tolerance`, then 1e-12.
    #[arg(long = "tie-tol")]
    tie_tol: Option<f64>,
    /// Cross-check against exact rational arithmetic. `auto` enables it for
    /// markets of at most 5 players run at most 30 rounds.
    #[arg(long, value_enum, default_value_t = OracleMode::Auto)]
    oracle: OracleMode,
}

#[derive(Args)]
struct SweepArgs {
    /// Scenario file providing the base market.
    #[arg(long)]
    scenario: PathBuf,
    /// Player whose good value is swept.
    #[arg(long)]
    player: usize,
    /// Value grid as LO:HI:COUNT, evenly spaced and inclusive.
    #[arg(long)]
    grid: String,
    /// Rounds per grid point; defaults to the scenario's `steps`, then 2000.
    #[arg(long)]
    steps: Option<u64>,
    /// Write here instead of stdout (atomically: temp file, then rename).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dead-band width around the growth threshold; defaults to the
    /// scenario's `tie_tolerance`, then 1e-12.
    #[arg(long = "tie-tol")]
    tie_tol: Option<f64>,
}

#[derive(Args)]
struct GenArgs {
    /// Number of players.
    #[arg(long)]
    n: usize,
    /// PRNG seed; the same (n, seed, value range) yields the same scenario.
    #[arg(long)]
    seed: u64,
    /// Bounds for the uniform good values, as LO:HI.
    #[arg(long = "value-range", default_value = "0.5:1.5")]
    value_range: String,
    /// Write here instead of stdout (atomically: temp file, then rename).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleMode {
    Auto,
    On,
    Off,
}

enum CliError {
    /// Malformed or inconsistent input: exit 1.
    Validation(String),
    /// Failed read or write: exit 2.
    Io(String),
    /// One or more verification checks failed: exit 3.
    Verification(Vec<&'static str>),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
            CliError::Verification(_) => 3,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Validation(m) | CliError::Io(m) => m.clone(),
            CliError::Verification(names) => {
                format!("verification failed: {}", names.join(", "))
            }
        }
    }
}

fn validation(err: impl std::fmt::Display) -> CliError {
    CliError::Validation(err.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Gen(args) => cmd_gen(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

fn read_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    load_scenario(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// Writes to stdout, or to `path` via a temp file in the same directory and
/// an atomic rename, so a crash never leaves a half-written file behind.
fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    let Some(path) = path else {
        return io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Io(format!("stdout: {e}")));
    };
    let io_err = |e: &dyn std::fmt::Display| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(&e))?;
    tmp.write_all(bytes).map_err(|e| io_err(&e))?;
    tmp.persist(path).map_err(|e| io_err(&e.error))?;
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let scenario = read_scenario(&args.scenario)?;
    let steps = args.steps.or(scenario.steps).unwrap_or(DEFAULT_SIM_STEPS);
    let traj = scenario.economy.run(steps).map_err(validation)?;
    let mut buf = Vec::new();
    save_trajectory_csv(&traj, &mut buf)
        .map_err(|e| CliError::Io(format!("rendering trajectory: {e}")))?;
    write_output(args.out.as_deref(), &buf)
}

fn cmd_classify(args: ClassifyArgs) -> Result<(), CliError> {
    let scenario = read_scenario(&args.scenario)?;
    let tie_tol = args
        .tie_tol
        .or(scenario.tie_tolerance)
        .unwrap_or(DEFAULT_TIE_TOLERANCE);
    let report = classify(&scenario.economy, tie_tol);
    println!("player  value         product       margin      phase");
    for p in &report.players {
        println!(
            "{:<6}  {:<12.6}  {:<12.6}  {:>+10.3e}  {}",
            p.player, p.value, p.product, p.margin, p.phase
        );
    }
    Ok(())
}

/// Largest deviation of any fraction row sum from 1 over the whole run.
fn worst_row_sum(traj: &Trajectory) -> f64 {
    let n = traj.economy().n();
    let mut worst = 0.0f64;
    for state in traj.states() {
        for i in 0..n {
            worst = worst.max((state.fraction_row_sum(i) - 1.0).abs());
        }
    }
    worst
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let scenario = read_scenario(&args.scenario)?;
    let steps = args.steps.or(scenario.steps).unwrap_or(DEFAULT_SIM_STEPS);
    let tie_tol = args
        .tie_tol
        .or(scenario.tie_tolerance)
        .unwrap_or(DEFAULT_TIE_TOLERANCE);
    let economy = scenario.economy.clone();
    let traj = economy.run(steps).map_err(validation)?;

    // Each row is (check, worst residual, largest allowed). Signed checks
    // report their worst margin, so `residual <= allowed` is the pass rule
    // for every row.
    let mut rows: Vec<(&'static str, f64, f64)> = vec![
        ("potential_law", check_potential_law(&traj), args.tol),
        (
            "two_step_identity",
            check_two_step_identity(&traj),
            args.tol,
        ),
        (
            "conserved_product",
            check_conserved_product(&traj),
            args.tol,
        ),
        ("row_sums", worst_row_sum(&traj), args.tol),
    ];
    if traj.horizon() >= 1 {
        let bounds = bound_constants(&traj).map_err(validation)?;
        rows.push((
            "amount_bounds",
            check_amount_bounds(&traj, &bounds),
            args.tol,
        ));
        rows.push((
            "fraction_envelope",
            check_fraction_decay_envelope(&traj, &bounds, tie_tol),
            args.tol,
        ));
    }
    rows.push((
        "optimal_ratio",
        check_optimal_ratio_invariance(&traj, tie_tol),
        args.tol,
    ));

    let use_oracle = match args.oracle {
        OracleMode::On => true,
        OracleMode::Off => false,
        OracleMode::Auto => economy.n() <= 5 && steps <= 30,
    };
    if use_oracle {
        let exact = scenario.rational_economy().map_err(validation)?;
        let states = exact.run_exact(steps);
        let cmp = compare(&states, &traj, args.tol).map_err(validation)?;
        rows.push(("oracle_log_amounts", cmp.max_log_amount_error, args.tol));
        rows.push(("oracle_fractions", cmp.max_fraction_error, args.tol));
        let worst_exact = [
            potential_residual_exact(&exact, &states),
            two_step_residual_exact(&exact, &states),
            conserved_product_residual_exact(&exact, &states),
            row_sum_residual_exact(&states),
            flow_conservation_residual_exact(&states),
        ]
        .into_iter()
        .max()
        .expect("five residuals");
        // The exact route has no rounding, so its own identities must hold
        // with zero slack.
        rows.push((
            "oracle_exact_identities",
            rational_to_f64(&worst_exact),
            0.0,
        ));
    }

    let mut failures = Vec::new();
    for &(name, residual, allowed) in &rows {
        let ok = residual <= allowed;
        println!(
            "{name:<24} {residual:>13.3e}  max {allowed:>8.1e}  {}",
            if ok { "ok" } else { "FAIL" }
        );
        if !ok {
            failures.push(name);
        }
    }
    if failures.is_empty() {
        println!(
            "verification passed ({} checks over {steps} rounds)",
            rows.len()
        );
        Ok(())
    } else {
        Err(CliError::Verification(failures))
    }
}

/// Parses `LO:HI:COUNT` into an inclusive, evenly spaced grid.
fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Validation(format!("--grid must be LO:HI:COUNT, got {text:?}"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let count: usize = parts[2].parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi && count >= 1) {
        return Err(bad());
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (count - 1) as f64;
    Ok((0..count)
        .map(|k| {
            if k == count - 1 {
                hi
            } else {
                lo + step * k as f64
            }
        })
        .collect())
}

/// Parses `LO:HI` value bounds.
fn parse_range(text: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Validation(format!("--value-range must be LO:HI, got {text:?}"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 2 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    Ok((lo, hi))
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let scenario = read_scenario(&args.scenario)?;
    let grid = parse_grid(&args.grid)?;
    let steps = args.steps.or(scenario.steps).unwrap_or(DEFAULT_SWEEP_STEPS);
    let tie_tol = args
        .tie_tol
        .or(scenario.tie_tolerance)
        .unwrap_or(DEFAULT_TIE_TOLERANCE);
    let points =
        sweep(&scenario.economy, args.player, &grid, steps, tie_tol).map_err(validation)?;
    let mut out = String::from("value,phase,empirical_exponent,theoretical_exponent\n");
    for p in &points {
        writeln!(
            out,
            "{:.16e},{},{:.16e},{:.16e}",
            p.value, p.phase, p.empirical_exponent, p.theoretical_exponent
        )
        .expect("writing to a String cannot fail");
    }
    write_output(args.out.as_deref(), out.as_bytes())
}

fn cmd_gen(args: GenArgs) -> Result<(), CliError> {
    let (lo, hi) = parse_range(&args.value_range)?;
    let economy = generate_random(args.n, args.seed, lo, hi).map_err(validation)?;
    let text = scenario_json(&economy, None, None, Some(args.seed));
    write_output(args.out.as_deref(), text.as_bytes())
}
