//! Experiment pipelines behind the subcommands: single-scenario solve,
//! exact evaluation, Monte Carlo runs, parameter sweeps, and solver
//! convergence traces.

use std::fmt;
use std::time::Instant;

use aoe_core::{
    bellman_residual, derive_seed, evaluate_policy_exact, policy_iteration_solve, rvi_solve,
    Kernel, PolicyError, PolicyKind, ScenarioParams, SimError, SolveConfig, SolveError,
    SolveResult, StateSpace, TransitionError,
};

use crate::config::{ConfigError, ScenarioFile};
use crate::rows::{ResultRow, TraceRow};

/// Command-line knobs shared by every pipeline.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Replaces the scenario's Monte Carlo base seed.
    pub seed_override: Option<u64>,
    /// Record wall-clock times in rows (off by default so reruns are
    /// byte-identical).
    pub timings: bool,
}

/// Anything a pipeline can fail with, mapped to exit codes by the CLI.
#[derive(Debug)]
pub enum RunError {
    /// User-fixable configuration problem.
    Config(ConfigError),
    /// The solver rejected the instance (multichain, singular evaluation,
    /// …): an internal invariant problem at this layer.
    Solver(SolveError),
    /// The simulator rejected its inputs or a policy acted inadmissibly.
    Sim(SimError),
    /// A policy could not act on the state space.
    Policy(PolicyError),
    /// The transition law rejected the instance while compiling the kernel.
    Kernel(TransitionError),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Solver(e) => write!(f, "solver failure: {e}"),
            RunError::Sim(e) => write!(f, "simulation failure: {e}"),
            RunError::Policy(e) => write!(f, "policy failure: {e}"),
            RunError::Kernel(e) => write!(f, "kernel construction failure: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}
impl From<SolveError> for RunError {
    fn from(e: SolveError) -> Self {
        RunError::Solver(e)
    }
}
impl From<SimError> for RunError {
    fn from(e: SimError) -> Self {
        RunError::Sim(e)
    }
}
impl From<PolicyError> for RunError {
    fn from(e: PolicyError) -> Self {
        RunError::Policy(e)
    }
}
impl From<TransitionError> for RunError {
    fn from(e: TransitionError) -> Self {
        RunError::Kernel(e)
    }
}

fn solve_config(file: &ScenarioFile, space: &StateSpace) -> SolveConfig {
    let mut cfg = SolveConfig::new(space);
    cfg.epsilon = file.solver.epsilon;
    cfg.max_iters = file.solver.max_iters;
    cfg
}

fn heuristic(file: &ScenarioFile, params: &ScenarioParams, name: &str) -> Option<PolicyKind> {
    match name {
        "greedy" => Some(PolicyKind::GreedyGenSwapAsap),
        "wur" => Some(PolicyKind::WaitUntilReady {
            threshold: params.wur_cutoff,
            strict_wait: file.params.wur_strict_wait,
        }),
        _ => None,
    }
}

/// Everything one (sweep value, policy) cell produces.
struct CellResult {
    avg_aoe_exact: f64,
    avg_aoe_mc: f64,
    mc_stderr: f64,
    rvi_iterations: u64,
    bellman_residual: f64,
    converged: bool,
    wall_time_ms: u64,
}

/// Solves (for `rvi`) or instantiates (heuristics) the named policy, then
/// evaluates it exactly and by simulation.
fn run_cell(
    file: &ScenarioFile,
    kernel: &Kernel,
    params: &ScenarioParams,
    policy_name: &str,
    mc_seed: u64,
    timings: bool,
) -> Result<CellResult, RunError> {
    let started = Instant::now();
    let (policy, iterations, residual, converged) = if policy_name == "rvi" {
        let cfg = solve_config(file, &kernel.space());
        let solved = rvi_solve(kernel, &cfg)?;
        let residual = bellman_residual(kernel, &solved);
        (
            PolicyKind::Optimal(solved.policy),
            solved.iterations as u64,
            residual,
            solved.converged,
        )
    } else {
        let policy = heuristic(file, params, policy_name).ok_or_else(|| {
            RunError::Config(ConfigError::Invalid {
                what: format!("unknown policy {policy_name:?}"),
            })
        })?;
        (policy, 0, 0.0, true)
    };

    let exact = evaluate_policy_exact(kernel, &policy)?;
    let sim_cfg = file.sim.to_sim_config(mc_seed);
    let report = aoe_core::simulate(params, &policy, &sim_cfg)?;

    Ok(CellResult {
        avg_aoe_exact: exact.avg_aoe,
        avg_aoe_mc: report.avg_aoe,
        mc_stderr: report.stderr,
        rvi_iterations: iterations,
        bellman_residual: residual,
        converged,
        wall_time_ms: if timings {
            started.elapsed().as_millis() as u64
        } else {
            0
        },
    })
}

/// A finished sweep: ordered rows plus any non-converged solver cells
/// (the run continues past them; `--strict` turns them into exit code 3).
pub struct SweepOutcome {
    pub rows: Vec<ResultRow>,
    pub nonconverged: Vec<String>,
}

/// Runs the scenario's `[sweep]`: for every sweep value, every listed
/// policy is solved/instantiated, evaluated exactly, and simulated. Rows
/// are emitted in (value, policy-list) order.
pub fn run_sweep(file: &ScenarioFile, opts: &RunOptions) -> Result<SweepOutcome, RunError> {
    let sweep = file.sweep.as_ref().ok_or(ConfigError::MissingSection {
        section: "sweep",
        id: file.id.clone(),
    })?;
    let base_seed = opts.seed_override.unwrap_or(file.sim.base_seed);

    let mut rows = Vec::with_capacity(sweep.values.len() * file.policies.len());
    let mut nonconverged = Vec::new();
    for (value_idx, &value) in sweep.values.iter().enumerate() {
        let params = file.sweep_params(value)?;
        let kernel = Kernel::build(&params)?;
        for (policy_idx, name) in file.policies.iter().enumerate() {
            let mc_seed = derive_seed(base_seed, value_idx as u64, policy_idx as u64);
            let cell = run_cell(file, &kernel, &params, name, mc_seed, opts.timings)?;
            if !cell.converged {
                nonconverged.push(format!(
                    "{} {}={} policy={}",
                    file.id, sweep.parameter, value, name
                ));
            }
            rows.push(ResultRow {
                scenario_id: file.id.clone(),
                sweep_param: sweep.parameter.clone(),
                sweep_value: value,
                policy: name.clone(),
                avg_aoe_exact: cell.avg_aoe_exact,
                avg_aoe_mc: cell.avg_aoe_mc,
                mc_stderr: cell.mc_stderr,
                rvi_iterations: cell.rvi_iterations,
                bellman_residual: cell.bellman_residual,
                wall_time_ms: cell.wall_time_ms,
            });
        }
    }
    Ok(SweepOutcome { rows, nonconverged })
}

/// A finished convergence run: per-iteration rows for every cell.
pub struct TraceOutcome {
    pub rows: Vec<TraceRow>,
    pub nonconverged: Vec<String>,
}

/// Runs the scenario's `[convergence]` cells: one value-iteration solve per
/// cell, emitting its full iteration trace.
pub fn run_convergence(file: &ScenarioFile, _opts: &RunOptions) -> Result<TraceOutcome, RunError> {
    let conv = file.convergence.as_ref().ok_or(ConfigError::MissingSection {
        section: "convergence",
        id: file.id.clone(),
    })?;

    let mut rows = Vec::new();
    let mut nonconverged = Vec::new();
    for cell in &conv.cells {
        let params = file.cell_params(cell)?;
        let kernel = Kernel::build(&params)?;
        let cfg = solve_config(file, &kernel.space());
        let solved = rvi_solve(&kernel, &cfg)?;
        if !solved.converged {
            nonconverged.push(format!("{} cell={}", file.id, cell.label));
        }
        for stat in &solved.trace {
            rows.push(TraceRow {
                scenario_id: cell.label.clone(),
                iteration: stat.iteration as u64,
                max_abs_change: stat.max_abs_change,
                span: stat.span,
                gain_estimate: stat.gain_estimate,
            });
        }
    }
    Ok(TraceOutcome { rows, nonconverged })
}

/// Result of solving a scenario at its base parameters.
pub struct SolveSummary {
    pub gain: f64,
    pub avg_aoe_exact: f64,
    pub iterations: u64,
    pub converged: bool,
    pub bellman_residual: f64,
    /// Independent-oracle cross-check: gain from exact policy iteration.
    pub oracle_gain: f64,
}

/// Solves the scenario's base parameters with value iteration, cross-checks
/// the gain against policy iteration, and evaluates the solved policy
/// exactly.
pub fn run_solve(file: &ScenarioFile) -> Result<SolveSummary, RunError> {
    let params = file.base_params()?;
    let kernel = Kernel::build(&params)?;
    let cfg = solve_config(file, &kernel.space());
    let solved = rvi_solve(&kernel, &cfg)?;
    let residual = bellman_residual(&kernel, &solved);
    let oracle: SolveResult = policy_iteration_solve(&kernel, &cfg)?;
    let exact = evaluate_policy_exact(&kernel, &PolicyKind::Optimal(solved.policy.clone()))?;
    Ok(SolveSummary {
        gain: solved.gain,
        avg_aoe_exact: exact.avg_aoe,
        iterations: solved.iterations as u64,
        converged: solved.converged,
        bellman_residual: residual,
        oracle_gain: oracle.gain,
    })
}

/// One policy's exact evaluation at the base parameters.
pub struct EvalLine {
    pub policy: String,
    pub avg_aoe_exact: f64,
}

/// Exactly evaluates every listed policy at the base parameters (solving
/// first where the list includes the optimal policy).
pub fn run_evaluate(file: &ScenarioFile) -> Result<Vec<EvalLine>, RunError> {
    let params = file.base_params()?;
    let kernel = Kernel::build(&params)?;
    let mut lines = Vec::new();
    for name in &file.policies {
        let policy = if name == "rvi" {
            let cfg = solve_config(file, &kernel.space());
            PolicyKind::Optimal(rvi_solve(&kernel, &cfg)?.policy)
        } else {
            heuristic(file, &params, name).ok_or_else(|| {
                RunError::Config(ConfigError::Invalid {
                    what: format!("unknown policy {name:?}"),
                })
            })?
        };
        let exact = evaluate_policy_exact(&kernel, &policy)?;
        lines.push(EvalLine {
            policy: name.clone(),
            avg_aoe_exact: exact.avg_aoe,
        });
    }
    Ok(lines)
}

/// One policy's Monte Carlo estimate at the base parameters.
pub struct SimLine {
    pub policy: String,
    pub avg_aoe: f64,
    pub stderr: f64,
    pub swap_success_rate: f64,
    pub mean_reset_value: Option<f64>,
}

/// Simulates every listed policy at the base parameters with per-policy
/// derived seeds.
pub fn run_simulate(file: &ScenarioFile, opts: &RunOptions) -> Result<Vec<SimLine>, RunError> {
    let params = file.base_params()?;
    let kernel = Kernel::build(&params)?;
    let base_seed = opts.seed_override.unwrap_or(file.sim.base_seed);
    let mut lines = Vec::new();
    for (policy_idx, name) in file.policies.iter().enumerate() {
        let policy = if name == "rvi" {
            let cfg = solve_config(file, &kernel.space());
            PolicyKind::Optimal(rvi_solve(&kernel, &cfg)?.policy)
        } else {
            heuristic(file, &params, name).ok_or_else(|| {
                RunError::Config(ConfigError::Invalid {
                    what: format!("unknown policy {name:?}"),
                })
            })?
        };
        let sim_cfg = file
            .sim
            .to_sim_config(derive_seed(base_seed, 0, policy_idx as u64));
        let report = aoe_core::simulate(&params, &policy, &sim_cfg)?;
        lines.push(SimLine {
            policy: name.clone(),
            avg_aoe: report.avg_aoe,
            stderr: report.stderr,
            swap_success_rate: report.swap_success_rate,
            mean_reset_value: report.mean_reset_value,
        });
    }
    Ok(lines)
}
