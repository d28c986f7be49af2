//! Relative value iteration for the average-reward optimality equation.
//!
//! Each sweep applies the Bellman operator to the previous bias estimate,
//! re-anchors the result so the reference state's bias is zero (the
//! subtracted value is the running gain estimate), and stops when the
//! largest bias change falls below the tolerance. On aperiodic single-
//! recurrent-class models the sweeps contract and the anchored bias
//! converges; on models with a periodic optimal chain (which arise at
//! deterministic corner parameters) the sweep sequence can oscillate
//! forever, so hitting the iteration cap is reported as an explicit
//! non-converged status — with the partial result — rather than an error.
//! The policy-iteration solver and exact evaluation remain available for
//! such scenarios.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::kernel::Kernel;
use crate::linalg::LinalgError;
use crate::policies::{PolicyError, TabularPolicy};
use crate::state::{Action, State, StateError, StateSpace};

/// Solver settings shared by value iteration and policy iteration.
#[derive(Clone, Copy, Debug)]
pub struct SolveConfig {
    /// Stop once the largest absolute bias change in a sweep is below this.
    pub epsilon: f64,
    /// Sweep cap (policy iteration treats it as an improvement-step cap).
    pub max_iters: usize,
    /// State whose bias is pinned to zero; its pre-anchoring update value is
    /// the gain estimate.
    pub ref_state: State,
}

impl SolveConfig {
    /// Defaults: tolerance `1e-8`, cap `100_000`, reference state "both
    /// channels invisible, no stored pairs, AoE 1" (dense index 0).
    pub fn new(space: &StateSpace) -> Self {
        Self {
            epsilon: 1e-8,
            max_iters: 100_000,
            ref_state: space.state_at(0).expect("nonempty state space"),
        }
    }
}

/// Progress of one solver iteration.
#[derive(Clone, Copy, Debug)]
pub struct IterationStat {
    /// 1-based iteration number.
    pub iteration: usize,
    /// Largest absolute change of the anchored bias in this iteration.
    pub max_abs_change: f64,
    /// Spread (max minus min) of the per-state bias change; for value
    /// iteration this brackets the distance of the gain estimate from the
    /// true gain.
    pub span: f64,
    /// Gain estimate after this iteration.
    pub gain_estimate: f64,
}

/// Outcome of a solver run.
#[derive(Clone, Debug)]
pub struct SolveResult {
    /// Estimated optimal gain: the negated minimal long-run average AoE.
    pub gain: f64,
    /// Anchored bias (relative value) per state; zero at the reference.
    pub bias: Vec<f64>,
    /// Greedy policy of the final iteration.
    pub policy: TabularPolicy,
    /// Iterations actually run.
    pub iterations: usize,
    /// Whether the stopping rule was met before the iteration cap. A false
    /// value is an honest "did not converge"; the fields still hold the last
    /// iterate.
    pub converged: bool,
    /// Per-iteration progress, in order.
    pub trace: Vec<IterationStat>,
}

/// A solver request that cannot be carried out.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SolveError {
    /// The reference state lies outside the model's state space.
    InvalidRef(StateError),
    /// A non-positive tolerance or zero iteration cap.
    InvalidConfig { what: &'static str },
    /// A policy to evaluate prescribes an action its state does not admit.
    PolicyNotApplicable(PolicyError),
    /// The policy-induced chain has several recurrent classes, violating the
    /// single-chain structure the average-reward equations assume; gain and
    /// stationary distribution are not well defined as scalars.
    MultipleRecurrentClasses { count: usize },
    /// The evaluation system was numerically singular. For a single
    /// recurrent class this cannot happen in exact arithmetic, so treat it
    /// as a model-construction bug.
    SingularEvaluation { pivot: usize },
    /// The stationary solve returned meaningfully negative probability mass.
    StationaryNegativeMass { state_index: usize, value: f64 },
    /// The stationary solve failed its own residual or normalization check.
    StationaryInconsistent { residual: f64 },
    /// Exact evaluation allocates a dense n-by-n system; this model exceeds
    /// the supported dense dimension.
    TooLargeForExactSolve { n_states: usize, max: usize },
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::InvalidRef(e) => write!(f, "invalid reference state: {e}"),
            SolveError::InvalidConfig { what } => write!(f, "invalid solver config: {what}"),
            SolveError::PolicyNotApplicable(e) => {
                write!(f, "policy not applicable to this model: {e}")
            }
            SolveError::MultipleRecurrentClasses { count } => write!(
                f,
                "policy-induced chain has {count} recurrent classes; the single-chain \
                 structure required for a scalar gain does not hold"
            ),
            SolveError::SingularEvaluation { pivot } => write!(
                f,
                "evaluation system singular at pivot {pivot} despite a single recurrent \
                 class; this indicates a model construction bug"
            ),
            SolveError::StationaryNegativeMass { state_index, value } => write!(
                f,
                "stationary distribution has negative mass {value} at state {state_index}"
            ),
            SolveError::StationaryInconsistent { residual } => write!(
                f,
                "stationary distribution failed its self-check (residual {residual})"
            ),
            SolveError::TooLargeForExactSolve { n_states, max } => write!(
                f,
                "{n_states} states exceed the dense evaluation limit of {max}"
            ),
        }
    }
}

impl core::error::Error for SolveError {}

impl From<PolicyError> for SolveError {
    fn from(e: PolicyError) -> Self {
        SolveError::PolicyNotApplicable(e)
    }
}

impl From<LinalgError> for SolveError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::Singular { pivot } => SolveError::SingularEvaluation { pivot },
            // Shape mismatches cannot arise from the evaluation builder.
            LinalgError::Shape { expected, .. } => SolveError::TooLargeForExactSolve {
                n_states: expected,
                max: expected,
            },
        }
    }
}

pub(crate) fn validate_config(cfg: &SolveConfig) -> Result<(), SolveError> {
    // Negated form on purpose: NaN must fail this check too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(cfg.epsilon > 0.0) {
        return Err(SolveError::InvalidConfig {
            what: "tolerance must be strictly positive",
        });
    }
    if cfg.max_iters == 0 {
        return Err(SolveError::InvalidConfig {
            what: "iteration cap must be at least 1",
        });
    }
    Ok(())
}

/// Runs relative value iteration on a prebuilt kernel.
///
/// Returns `Ok` with `converged = false` when the iteration cap is reached
/// first; the result then carries the last iterate and full trace so the
/// caller can inspect or report the partial run.
pub fn rvi_solve(kernel: &Kernel, cfg: &SolveConfig) -> Result<SolveResult, SolveError> {
    validate_config(cfg)?;
    let n = kernel.n_states();
    let ref_idx = kernel
        .space()
        .index(&cfg.ref_state)
        .map_err(SolveError::InvalidRef)?;

    let mut bias_prev = vec![0.0f64; n];
    let mut bias = vec![0.0f64; n];
    let mut actions = vec![Action::WAIT; n];
    let mut trace = Vec::new();
    let mut gain = 0.0;
    let mut converged = false;
    let mut iterations = 0;

    for iteration in 1..=cfg.max_iters {
        iterations = iteration;
        kernel.greedy(&bias_prev, &mut bias, &mut actions);
        gain = bias[ref_idx];
        for v in bias.iter_mut() {
            *v -= gain;
        }

        let mut max_abs = 0.0f64;
        let mut diff_max = f64::NEG_INFINITY;
        let mut diff_min = f64::INFINITY;
        for (new, old) in bias.iter().zip(&bias_prev) {
            let d = new - old;
            max_abs = max_abs.max(d.abs());
            diff_max = diff_max.max(d);
            diff_min = diff_min.min(d);
        }
        trace.push(IterationStat {
            iteration,
            max_abs_change: max_abs,
            span: diff_max - diff_min,
            gain_estimate: gain,
        });

        core::mem::swap(&mut bias, &mut bias_prev);
        if max_abs < cfg.epsilon {
            converged = true;
            break;
        }
    }

    let policy = TabularPolicy::new(kernel.space(), actions)
        .expect("greedy actions are admissible by construction");
    Ok(SolveResult {
        gain,
        bias: bias_prev,
        policy,
        iterations,
        converged,
        trace,
    })
}

/// Largest absolute violation of the optimality equation by a solver
/// result: `max_s | max_a Q(s, a) - bias(s) - gain |`.
///
/// For a run that stopped under its tolerance this is bounded by roughly
/// twice the tolerance; it is the machine-checkable certificate that the
/// returned gain/bias pair actually solves the optimality equation.
pub fn bellman_residual(kernel: &Kernel, result: &SolveResult) -> f64 {
    let n = kernel.n_states();
    let mut residual = 0.0f64;
    for s in 0..n {
        let mut best = f64::NEG_INFINITY;
        for ordinal in 0..kernel.actions(s).len() {
            let q = kernel.q_value(kernel.pair(s, ordinal), &result.bias);
            best = best.max(q);
        }
        residual = residual.max((best - result.bias[s] - result.gain).abs());
    }
    residual
}

#[cfg(test)]
// Test fixtures mutate a default value so the deviating fields stand out.
#[allow(clippy::field_reassign_with_default)]
mod tests {
    use super::*;
    use crate::params::{ScenarioParams, VisibilityChain};
    use crate::state::LINK_ABSENT;

    fn small_params() -> ScenarioParams {
        let mut p = ScenarioParams::default();
        p.cutoff = 2;
        p.aoe_cap = 6;
        p
    }

    #[test]
    fn degenerate_generation_pins_the_gain_at_the_cap() {
        // With p_gen = 0 no pair ever forms, so every policy drifts to the
        // AoE cap and the optimal gain is exactly -cap.
        let mut params = small_params();
        params.p_gen = 0.0;
        let kernel = Kernel::build(&params).unwrap();
        let cfg = SolveConfig::new(&kernel.space());
        let result = rvi_solve(&kernel, &cfg).unwrap();
        assert!(result.converged);
        assert!(
            (result.gain - (-6.0)).abs() < 1e-6,
            "gain {} should be -cap",
            result.gain
        );
        let residual = bellman_residual(&kernel, &result);
        assert!(residual < 100.0 * cfg.epsilon, "residual {residual}");
    }

    #[test]
    fn degenerate_swap_pins_the_gain_at_the_cap() {
        let mut params = small_params();
        params.p_swap = 0.0;
        let kernel = Kernel::build(&params).unwrap();
        let cfg = SolveConfig::new(&kernel.space());
        let result = rvi_solve(&kernel, &cfg).unwrap();
        assert!(result.converged);
        assert!((result.gain - (-6.0)).abs() < 1e-6);
    }

    #[test]
    fn trace_is_anchored_and_monotone_in_iteration_count() {
        let params = small_params();
        let kernel = Kernel::build(&params).unwrap();
        let cfg = SolveConfig::new(&kernel.space());
        let result = rvi_solve(&kernel, &cfg).unwrap();
        assert!(result.converged);
        assert_eq!(result.trace.len(), result.iterations);
        for (i, stat) in result.trace.iter().enumerate() {
            assert_eq!(stat.iteration, i + 1);
            assert!(stat.max_abs_change >= 0.0);
            assert!(stat.span >= 0.0);
            assert!(stat.span <= 2.0 * stat.max_abs_change + 1e-15);
        }
        // The anchor state keeps bias exactly zero.
        let ref_idx = kernel.space().index(&cfg.ref_state).unwrap();
        assert_eq!(result.bias[ref_idx], 0.0);
        // Last recorded change is the one that met the tolerance.
        assert!(result.trace.last().unwrap().max_abs_change < cfg.epsilon);
    }

    #[test]
    fn tighter_tolerance_never_needs_fewer_sweeps() {
        let params = small_params();
        let kernel = Kernel::build(&params).unwrap();
        let mut cfg = SolveConfig::new(&kernel.space());
        cfg.epsilon = 1e-4;
        let coarse = rvi_solve(&kernel, &cfg).unwrap();
        cfg.epsilon = 1e-10;
        let fine = rvi_solve(&kernel, &cfg).unwrap();
        assert!(coarse.converged && fine.converged);
        assert!(fine.iterations >= coarse.iterations);
        // Both runs agree on the gain to within the coarse tolerance scale.
        assert!((fine.gain - coarse.gain).abs() < 1e-3);
    }

    #[test]
    fn iteration_cap_reports_non_convergence_with_partial_result() {
        let params = small_params();
        let kernel = Kernel::build(&params).unwrap();
        let mut cfg = SolveConfig::new(&kernel.space());
        cfg.max_iters = 3;
        let result = rvi_solve(&kernel, &cfg).unwrap();
        assert!(!result.converged);
        assert_eq!(result.iterations, 3);
        assert_eq!(result.trace.len(), 3);
        assert!(result.gain.is_finite());
    }

    #[test]
    fn a_periodic_deterministic_scenario_is_reported_not_converged() {
        // Deterministic generation, swap, and visibility make the optimal
        // chain a two-cycle; the sweep sequence oscillates instead of
        // settling, and the solver must say so rather than pretend.
        let mut params = ScenarioParams::default();
        params.p_gen = 1.0;
        params.p_swap = 1.0;
        let always = VisibilityChain::new([[0.0, 1.0], [0.0, 1.0]]).unwrap();
        params.vis12 = always;
        params.vis23 = always;
        params.cutoff = 2;
        params.aoe_cap = 6;
        let kernel = Kernel::build(&params).unwrap();
        let mut cfg = SolveConfig::new(&kernel.space());
        cfg.max_iters = 2_000;
        let result = rvi_solve(&kernel, &cfg).unwrap();
        assert!(!result.converged, "periodic chain should not converge");
        assert_eq!(result.iterations, 2_000);
    }

    #[test]
    fn invalid_configs_and_references_are_rejected() {
        let params = small_params();
        let kernel = Kernel::build(&params).unwrap();
        let space = kernel.space();

        let mut cfg = SolveConfig::new(&space);
        cfg.epsilon = 0.0;
        assert!(matches!(
            rvi_solve(&kernel, &cfg),
            Err(SolveError::InvalidConfig { .. })
        ));

        let mut cfg = SolveConfig::new(&space);
        cfg.max_iters = 0;
        assert!(matches!(
            rvi_solve(&kernel, &cfg),
            Err(SolveError::InvalidConfig { .. })
        ));

        let mut cfg = SolveConfig::new(&space);
        cfg.ref_state = State::new(false, false, LINK_ABSENT, LINK_ABSENT, 99);
        assert!(matches!(
            rvi_solve(&kernel, &cfg),
            Err(SolveError::InvalidRef(_))
        ));
    }

    #[test]
    fn gain_is_invariant_to_the_anchor_choice() {
        let params = small_params();
        let kernel = Kernel::build(&params).unwrap();
        let cfg_a = SolveConfig::new(&kernel.space());
        let mut cfg_b = SolveConfig::new(&kernel.space());
        cfg_b.ref_state = State::new(true, true, 1, 1, 3);
        let a = rvi_solve(&kernel, &cfg_a).unwrap();
        let b = rvi_solve(&kernel, &cfg_b).unwrap();
        assert!(a.converged && b.converged);
        assert!((a.gain - b.gain).abs() < 1e-6);
    }
}
