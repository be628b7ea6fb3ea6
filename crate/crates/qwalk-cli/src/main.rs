//! `qwalk` — simulate 1-D quantum walks on a cycle with jump disorder.
//!
//! Subcommands: `simulate` (one disorder-averaged run), `sweep` (a (p, j)
//! parameter scan), `stats` (recompute observables from a saved matrix) and
//! `selftest` (fast invariant suite). Exit codes: 0 success, 1 runtime or
//! selftest failure, 2 parameter validation error.

mod config;
mod output;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use config::{FormatArg, RunFlags, SimulateSpec, SweepSpec};
use qwalk_core::engine;
use qwalk_core::stats::{laplace_fit, monte_carlo_floor, CenterMode, Window};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

#[derive(Parser)]
#[command(
    name = "qwalk",
    version,
    about = "Monte Carlo simulator for quantum walks with jump disorder on a cycle"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one disorder-averaged simulation and write matrix/summary files
    Simulate(SimulateArgs),
    /// Scan a (p, j) grid and write a flat result table
    Sweep(SweepArgs),
    /// Recompute summary observables from a saved matrix file
    Stats(StatsArgs),
    /// Run the fast invariant suite
    Selftest,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    run: RunFlags,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunFlags,
    /// JSON grid file: {"p": [...], "j": [...]}
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Collapse exponent for x = p·j^alpha
    #[arg(long)]
    alpha: Option<f64>,
    /// Collapse exponent for y = j^(−beta)·Var
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Args)]
struct StatsArgs {
    /// Matrix file produced by `simulate` (.matrix.csv or .json)
    #[arg(long)]
    input: PathBuf,
    /// Output path prefix
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Injection channel used for the auxiliary second moment
    #[arg(long = "initial-channel", allow_hyphen_values = true, default_value_t = 0.5)]
    initial_channel: f64,
    /// Monte Carlo runs behind the matrix (sets the fit probability floor)
    #[arg(long = "R")]
    runs: Option<usize>,
    /// Also fit the final snapshot's central peak of this width
    #[arg(long = "fit-j")]
    fit_j: Option<usize>,
}

fn install_thread_pool(threads: Option<usize>) -> Result<Option<rayon::ThreadPool>, CliError> {
    match threads {
        None | Some(0) => Ok(None),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map(Some)
            .map_err(|e| CliError::Runtime(format!("cannot build thread pool: {e}"))),
    }
}

fn in_pool<T: Send>(pool: &Option<rayon::ThreadPool>, work: impl FnOnce() -> T + Send) -> T {
    match pool {
        Some(pool) => pool.install(work),
        None => work(),
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let (spec, threads) = SimulateSpec::resolve(&args.run)?;
    let run_config = spec.run_config()?;
    let initial_slot = run_config
        .initial_slot()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let pool = install_thread_pool(threads)?;
    let series = in_pool(&pool, || engine::run(&run_config))
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let files = output::write_simulate(&spec, &series, initial_slot)?;
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let (spec, threads) =
        SweepSpec::resolve(&args.run, args.grid.as_deref(), args.alpha, args.beta)?;
    let sweep_config = spec.sweep_config();
    let pool = install_thread_pool(threads)?;
    let rows = in_pool(&pool, || {
        engine::sweep(&sweep_config, &spec.p_values, &spec.j_values)
    });
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    let files = output::write_sweep(&spec, &rows)?;
    for f in files {
        println!("wrote {}", f.display());
    }
    println!("sweep: {} points, {} with errors", rows.len(), failed);
    Ok(())
}

fn cmd_stats(args: &StatsArgs) -> Result<(), CliError> {
    let is_json = args
        .input
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let (channels, rows) = if is_json {
        output::parse_matrix_json(&args.input)?
    } else {
        output::parse_matrix_csv(&args.input)?
    };
    if rows.is_empty() {
        return Err(CliError::Validation("matrix file has no snapshots".into()));
    }
    let summary = output::summarize(&rows, args.initial_channel)?;
    let n = channels.len();

    let out_path = output::write_stats_summary(&args.out, args.format, &summary, &args.input)?;
    println!("wrote {}", out_path.display());

    let (final_t, final_dist) = rows.last().unwrap();
    let last = summary.last().unwrap();
    println!(
        "t={final_t}: variance={:.6} shannon={:.6} tsallis_q2={:.6}",
        last.variance, last.shannon, last.tsallis_q2
    );
    if let Some(j) = args.fit_j {
        let floor = args.runs.map_or(0.0, |r| monte_carlo_floor(r, n));
        let whole = laplace_fit(
            final_dist,
            Window::whole_distribution(args.initial_channel, *final_t),
            CenterMode::Fixed(args.initial_channel),
            floor,
        );
        let peak = laplace_fit(
            final_dist,
            Window::central_peak(args.initial_channel, j),
            CenterMode::Fixed(args.initial_channel),
            floor,
        );
        match whole {
            Ok(f) => println!(
                "whole-distribution fit: inv_a={:.6} r2={:.4} ({} points)",
                f.inv_a, f.r_squared, f.points_used
            ),
            Err(e) => println!("whole-distribution fit failed: {e}"),
        }
        match peak {
            Ok(f) => println!(
                "central-peak fit (width {j}): inv_a={:.6} r2={:.4} ({} points)",
                f.inv_a, f.r_squared, f.points_used
            ),
            Err(e) => println!("central-peak fit failed: {e}"),
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Selftest => {
            return if selftest::run_selftest() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
