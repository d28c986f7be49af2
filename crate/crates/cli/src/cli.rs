//! Command-line front end: argument parsing, subcommand dispatch, output
//! files, and exit codes.
//!
//! Exit codes: 0 success; 2 configuration or input problem (bad flags, bad
//! scenario file, malformed CSV); 3 a solve failed to converge under
//! `--strict` (result files are still written first); 4 an internal
//! invariant failed (solver, simulator, or kernel rejected a valid-looking
//! instance).

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use aoe_core::SimError;

use crate::config::{resolve_scenario, ConfigError, ScenarioFile};
use crate::plot::render;
use crate::rows::{fmt_fixed, fmt_sci, parse_csv, write_sweep_csv, write_trace_csv, CsvError};
use crate::runner::{
    run_convergence, run_evaluate, run_simulate, run_solve, run_sweep, RunError, RunOptions,
};

/// Repeater-chain entanglement-freshness toolkit.
#[derive(Debug, Parser)]
#[command(
    name = "aoe-chain",
    version,
    about = "Solve, evaluate, and simulate freshness-optimal policies for a \
             two-link quantum repeater chain with intermittent satellite visibility."
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file to load (overrides any scenario name lookup).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override the scenario's Monte Carlo base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory that receives result files.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out_dir: PathBuf,

    /// Result file format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,

    /// Record wall-clock times in result rows (reruns stop being
    /// byte-identical).
    #[arg(long, global = true)]
    timings: bool,

    /// Exit with status 3 if any solve fails to converge. Result files are
    /// written before the failure is reported.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    /// Versioned comma-separated rows (the only format today).
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a scenario for its freshness-optimal policy and cross-check
    /// the gain against an independent exact solver.
    Solve {
        /// Scenario name: a file path, a file under ./scenarios/, or a
        /// built-in (baseline, fig1, fig2, fig3, fig4).
        scenario: Option<String>,
    },
    /// Exactly evaluate every configured policy via its stationary
    /// distribution.
    Evaluate { scenario: Option<String> },
    /// Monte Carlo estimate for every configured policy.
    Simulate { scenario: Option<String> },
    /// Run the scenario's parameter sweep and write one CSV row per
    /// (value, policy) cell.
    Sweep { scenario: Option<String> },
    /// Solve each configured convergence cell and write the full
    /// per-iteration trace.
    Convergence { scenario: Option<String> },
    /// Render a result CSV into an SVG chart plus a gnuplot data file.
    Plot {
        /// A CSV previously produced by `sweep`, `convergence`, or
        /// `reproduce`.
        csv: PathBuf,
    },
    /// Run a built-in figure experiment end to end: CSV, SVG chart, and
    /// gnuplot data file.
    Reproduce {
        /// One of: fig1, fig2, fig3, fig4.
        name: String,
    },
}

/// Anything the CLI can fail with, carrying its process exit code.
#[derive(Debug)]
pub enum AppError {
    Run(RunError),
    Csv { path: PathBuf, err: CsvError },
    Io { path: PathBuf, err: io::Error },
    StrictNonConvergence { cells: Vec<String> },
}

impl AppError {
    /// Maps failures to exit codes: 2 for anything the user can fix in
    /// inputs or flags, 3 for `--strict` non-convergence, 4 for internal
    /// invariant violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Run(RunError::Config(_)) => 2,
            AppError::Run(RunError::Sim(SimError::InvalidConfig { .. })) => 2,
            AppError::Csv { .. } | AppError::Io { .. } => 2,
            AppError::StrictNonConvergence { .. } => 3,
            AppError::Run(_) => 4,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Run(e) => write!(f, "{e}"),
            AppError::Csv { path, err } => write!(f, "{}: {err}", path.display()),
            AppError::Io { path, err } => write!(f, "{}: {err}", path.display()),
            AppError::StrictNonConvergence { cells } => write!(
                f,
                "solver did not converge for {} cell(s): {}",
                cells.len(),
                cells.join("; ")
            ),
        }
    }
}

impl std::error::Error for AppError {}

impl From<RunError> for AppError {
    fn from(e: RunError) -> Self {
        AppError::Run(e)
    }
}

/// Parses arguments from the process environment, runs the command, and
/// returns the process exit code.
pub fn run_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Usage errors exit 2; --help/--version exit 0.
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), AppError> {
    match &cli.command {
        Command::Solve { scenario } => cmd_solve(cli, scenario.as_deref()),
        Command::Evaluate { scenario } => cmd_evaluate(cli, scenario.as_deref()),
        Command::Simulate { scenario } => cmd_simulate(cli, scenario.as_deref()),
        Command::Sweep { scenario } => cmd_sweep(cli, scenario.as_deref()),
        Command::Convergence { scenario } => cmd_convergence(cli, scenario.as_deref()),
        Command::Plot { csv } => cmd_plot(cli, csv),
        Command::Reproduce { name } => cmd_reproduce(cli, name),
    }
}

fn scenario(cli: &Cli, name: Option<&str>) -> Result<ScenarioFile, AppError> {
    resolve_scenario(cli.config.as_deref(), name)
        .map_err(|e| AppError::Run(RunError::Config(e)))
}

fn options(cli: &Cli) -> RunOptions {
    RunOptions {
        seed_override: cli.seed,
        timings: cli.timings,
    }
}

fn write_output(cli: &Cli, file_name: &str, content: &str) -> Result<PathBuf, AppError> {
    fs::create_dir_all(&cli.out_dir).map_err(|err| AppError::Io {
        path: cli.out_dir.clone(),
        err,
    })?;
    let path = cli.out_dir.join(file_name);
    fs::write(&path, content).map_err(|err| AppError::Io {
        path: path.clone(),
        err,
    })?;
    println!("wrote {}", path.display());
    Ok(path)
}

/// Warns about every non-converged cell; under `--strict` the warnings
/// escalate to exit code 3 (after outputs were written).
fn finish_nonconverged(cli: &Cli, nonconverged: &[String]) -> Result<(), AppError> {
    for cell in nonconverged {
        eprintln!("warning: solver did not converge: {cell}");
    }
    if cli.strict && !nonconverged.is_empty() {
        return Err(AppError::StrictNonConvergence {
            cells: nonconverged.to_vec(),
        });
    }
    Ok(())
}

fn cmd_solve(cli: &Cli, name: Option<&str>) -> Result<(), AppError> {
    let file = scenario(cli, name)?;
    let summary = run_solve(&file)?;
    println!("scenario              {}", file.id);
    println!("gain                  {}", fmt_fixed(summary.gain));
    println!("average AoE (exact)   {}", fmt_fixed(summary.avg_aoe_exact));
    println!("iterations            {}", summary.iterations);
    println!("converged             {}", summary.converged);
    println!("bellman residual      {}", fmt_sci(summary.bellman_residual));
    println!("cross-check gain      {}", fmt_fixed(summary.oracle_gain));
    if !summary.converged {
        finish_nonconverged(cli, std::slice::from_ref(&file.id))?;
    }
    Ok(())
}

fn cmd_evaluate(cli: &Cli, name: Option<&str>) -> Result<(), AppError> {
    let file = scenario(cli, name)?;
    let lines = run_evaluate(&file)?;
    println!("scenario {}", file.id);
    println!("{:<10} avg AoE (exact)", "policy");
    for line in lines {
        println!("{:<10} {}", line.policy, fmt_fixed(line.avg_aoe_exact));
    }
    Ok(())
}

fn cmd_simulate(cli: &Cli, name: Option<&str>) -> Result<(), AppError> {
    let file = scenario(cli, name)?;
    let lines = run_simulate(&file, &options(cli))?;
    println!("scenario {}", file.id);
    println!(
        "{:<10} {:<16} {:<12} {:<14} mean reset",
        "policy", "avg AoE (mc)", "stderr", "swap success"
    );
    for line in lines {
        let reset = match line.mean_reset_value {
            Some(v) => fmt_fixed(v),
            None => "-".to_string(),
        };
        println!(
            "{:<10} {:<16} {:<12} {:<14} {}",
            line.policy,
            fmt_fixed(line.avg_aoe),
            fmt_fixed(line.stderr),
            fmt_fixed(line.swap_success_rate),
            reset
        );
    }
    Ok(())
}

fn cmd_sweep(cli: &Cli, name: Option<&str>) -> Result<(), AppError> {
    let file = scenario(cli, name)?;
    let outcome = run_sweep(&file, &options(cli))?;
    write_output(cli, &format!("{}.csv", file.id), &write_sweep_csv(&outcome.rows))?;
    finish_nonconverged(cli, &outcome.nonconverged)
}

fn cmd_convergence(cli: &Cli, name: Option<&str>) -> Result<(), AppError> {
    let file = scenario(cli, name)?;
    let outcome = run_convergence(&file, &options(cli))?;
    write_output(cli, &format!("{}.csv", file.id), &write_trace_csv(&outcome.rows))?;
    finish_nonconverged(cli, &outcome.nonconverged)
}

fn render_to_files(cli: &Cli, stem: &str, csv_text: &str) -> Result<(), AppError> {
    let parsed = parse_csv(csv_text).map_err(|err| AppError::Csv {
        path: cli.out_dir.join(format!("{stem}.csv")),
        err,
    })?;
    let rendered = render(&parsed);
    write_output(cli, &format!("{stem}.svg"), &rendered.svg)?;
    write_output(cli, &format!("{stem}.dat"), &rendered.dat)?;
    Ok(())
}

fn cmd_plot(cli: &Cli, csv: &Path) -> Result<(), AppError> {
    let text = fs::read_to_string(csv).map_err(|err| AppError::Io {
        path: csv.to_path_buf(),
        err,
    })?;
    let parsed = parse_csv(&text).map_err(|err| AppError::Csv {
        path: csv.to_path_buf(),
        err,
    })?;
    let rendered = render(&parsed);
    let stem = csv
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("plot")
        .to_string();
    write_output(cli, &format!("{stem}.svg"), &rendered.svg)?;
    write_output(cli, &format!("{stem}.dat"), &rendered.dat)?;
    Ok(())
}

/// Checks a `reproduce` target name.
fn validate_figure_name(name: &str) -> Result<(), ConfigError> {
    match name {
        "fig1" | "fig2" | "fig3" | "fig4" => Ok(()),
        other => Err(ConfigError::Invalid {
            what: format!("unknown figure {other:?}; expected fig1, fig2, fig3, or fig4"),
        }),
    }
}

fn cmd_reproduce(cli: &Cli, name: &str) -> Result<(), AppError> {
    validate_figure_name(name).map_err(|e| AppError::Run(RunError::Config(e)))?;
    let file = scenario(cli, Some(name))?;
    let opts = options(cli);
    let (csv_text, nonconverged) = if file.sweep.is_some() {
        let outcome = run_sweep(&file, &opts)?;
        (write_sweep_csv(&outcome.rows), outcome.nonconverged)
    } else {
        let outcome = run_convergence(&file, &opts)?;
        (write_trace_csv(&outcome.rows), outcome.nonconverged)
    };
    write_output(cli, &format!("{}.csv", file.id), &csv_text)?;
    render_to_files(cli, &file.id, &csv_text)?;
    finish_nonconverged(cli, &nonconverged)
}
