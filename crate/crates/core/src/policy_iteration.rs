//! Howard policy iteration for the average-reward problem: exact gain/bias
//! evaluation of the current policy (one dense LU solve), then a greedy
//! improvement sweep, repeated until no state switches action.
//!
//! The improvement step keeps the incumbent action unless a challenger is
//! better by a relative margin, which prevents cycling between actions that
//! are tied up to rounding. Because every iteration evaluates exactly, the
//! converged gain carries linear-solver accuracy rather than fixed-point
//! tolerance; this makes policy iteration the natural independent oracle
//! for the value-iteration solver — it shares none of its sweep/anchoring
//! machinery. It also handles periodic chains, where value iteration
//! oscillates. The starting point is the greedy heuristic, a fixed rule
//! independent of anything value iteration computes.

use alloc::vec::Vec;

use crate::eval::evaluate_dense;
use crate::kernel::Kernel;
use crate::policies::{act_greedy, TabularPolicy};
use crate::rvi::{validate_config, IterationStat, SolveConfig, SolveError, SolveResult};

/// Relative margin a challenger action must clear to replace the incumbent.
const IMPROVEMENT_MARGIN: f64 = 1e-10;

/// Runs policy iteration on a prebuilt kernel.
///
/// `cfg.max_iters` caps improvement rounds (far fewer are ever needed; the
/// cap exists to bound pathological inputs), `cfg.ref_state` anchors the
/// bias, and `cfg.epsilon` is unused — each evaluation is exact.
pub fn policy_iteration_solve(
    kernel: &Kernel,
    cfg: &SolveConfig,
) -> Result<SolveResult, SolveError> {
    validate_config(cfg)?;
    let n = kernel.n_states();
    let ref_idx = kernel
        .space()
        .index(&cfg.ref_state)
        .map_err(SolveError::InvalidRef)?;

    // Seed with the greedy heuristic: always admissible, and a reasonable
    // first guess that keeps the number of exact solves small.
    let space = kernel.space();
    let mut ordinals: Vec<u32> = space
        .states()
        .enumerate()
        .map(|(s_idx, s)| {
            kernel
                .action_ordinal(s_idx, &act_greedy(&s))
                .expect("greedy actions are admissible") as u32
        })
        .collect();

    let mut bias_prev: Vec<f64> = alloc::vec![0.0; n];
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut gain = 0.0;
    let mut bias = alloc::vec![0.0; n];

    for iteration in 1..=cfg.max_iters {
        iterations = iteration;
        let evaluation = evaluate_dense(kernel, &ordinals, ref_idx)?;
        gain = evaluation.gain;
        bias = evaluation.bias;

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
        bias_prev.copy_from_slice(&bias);

        // Improvement sweep.
        let mut switched = 0usize;
        for (s, ordinal_slot) in ordinals.iter_mut().enumerate() {
            let incumbent = *ordinal_slot as usize;
            let q_incumbent = kernel.q_value(kernel.pair(s, incumbent), &bias);
            let mut best_ordinal = incumbent;
            let mut best_q = q_incumbent;
            for ordinal in 0..kernel.actions(s).len() {
                if ordinal == incumbent {
                    continue;
                }
                let q = kernel.q_value(kernel.pair(s, ordinal), &bias);
                if q > best_q {
                    best_ordinal = ordinal;
                    best_q = q;
                }
            }
            let margin = IMPROVEMENT_MARGIN * (1.0 + q_incumbent.abs());
            if best_ordinal != incumbent && best_q > q_incumbent + margin {
                *ordinal_slot = best_ordinal as u32;
                switched += 1;
            }
        }

        if switched == 0 {
            converged = true;
            break;
        }
    }

    let actions: Vec<_> = (0..n)
        .map(|s| kernel.actions(s)[ordinals[s] as usize])
        .collect();
    let policy = TabularPolicy::new(kernel.space(), actions)
        .expect("kernel actions are admissible by construction");
    Ok(SolveResult {
        gain,
        bias,
        policy,
        iterations,
        converged,
        trace,
    })
}
