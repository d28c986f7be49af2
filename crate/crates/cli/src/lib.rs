//! Experiment harness for the repeater-chain freshness toolkit: scenario
//! files, experiment pipelines, versioned CSV results, chart rendering, and
//! the `aoe-chain` command-line interface.
//!
//! The numerical model lives in the companion core crate; this crate adds
//! everything that touches the outside world — TOML scenario configs,
//! deterministic result files, SVG/gnuplot plots, and process exit codes.

pub mod cli;
pub mod config;
pub mod plot;
pub mod rows;
pub mod runner;

pub use cli::{run_main, AppError};
pub use config::{
    load_scenario_file, resolve_scenario, ConfigError, ScenarioFile, BUILTIN_SCENARIOS,
    POLICY_NAMES,
};
pub use plot::{render, RenderedPlot};
pub use rows::{
    parse_csv, write_sweep_csv, write_trace_csv, CsvError, ParsedCsv, ResultRow, TraceRow,
};
pub use runner::{
    run_convergence, run_evaluate, run_simulate, run_solve, run_sweep, RunError, RunOptions,
    SweepOutcome, TraceOutcome,
};
