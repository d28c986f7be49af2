//! Exact policy evaluation: stationary distribution, gain, and bias of the
//! chain a stationary policy induces, via one dense LU factorization.
//!
//! Writing `P` for the policy's transition matrix and `R` for its expected
//! one-slot rewards, the matrix `M` equals `I - P` with the reference
//! state's column replaced by all-ones. For a chain with a single recurrent
//! class `M` is nonsingular, and one factorization answers both questions:
//!
//! - `M z = R` yields the bias (with the reference entry read as the gain),
//!   because it is the evaluation equation `h = R - gain·1 + P h` with
//!   `h(ref) = 0` substituted in;
//! - `Mᵀ w = e_ref` yields the stationary distribution, because the
//!   equations `wᵀ(I - P) = 0` on non-reference columns plus `Σ w = 1` on
//!   the reference column characterize it.
//!
//! Recurrence structure is checked first (strongly connected components of
//! the support graph): several recurrent classes mean the scalar gain and
//! the stationary distribution are not well defined, which is reported as
//! an error rather than silently averaged over.

use alloc::vec;
use alloc::vec::Vec;

use crate::kernel::Kernel;
use crate::linalg::lu_factor;
use crate::policies::PolicyKind;
use crate::rvi::SolveError;
use crate::scc::{strongly_connected_components, terminal_components};

/// Dense-evaluation size guard: `n` states allocate an `n x n` matrix of
/// `f64`, so this cap keeps the allocation near 2 GiB.
pub const MAX_DENSE_STATES: usize = 16_384;

/// Exact long-run behavior of one policy on one scenario.
#[derive(Clone, Debug)]
pub struct EvalResult {
    /// Long-run average age of entanglement.
    pub avg_aoe: f64,
    /// Stationary distribution over the dense state space: nonnegative,
    /// summing to one, and exactly zero on transient states.
    pub stationary: Vec<f64>,
}

/// Gain and bias of a policy, plus the raw stationary solve, from one LU
/// factorization. Internal building block shared with policy iteration.
pub(crate) struct DenseEvaluation {
    pub gain: f64,
    pub bias: Vec<f64>,
    pub stationary_raw: Vec<f64>,
}

/// Resolves a policy to per-state action ordinals within the kernel.
pub(crate) fn policy_ordinals(
    kernel: &Kernel,
    policy: &PolicyKind,
) -> Result<Vec<u32>, SolveError> {
    let space = kernel.space();
    let mut ordinals = Vec::with_capacity(kernel.n_states());
    for (s_idx, s) in space.states().enumerate() {
        let action = policy.act(&s)?;
        let ordinal = kernel.action_ordinal(s_idx, &action).ok_or(
            SolveError::PolicyNotApplicable(crate::policies::PolicyError::InadmissibleEntry {
                state: s,
                action,
                violation: crate::state::check_admissible(&s, &action)
                    .err()
                    .unwrap_or(crate::state::AdmissibilityError::SwapExcludesGeneration),
            }),
        )?;
        ordinals.push(ordinal as u32);
    }
    Ok(ordinals)
}

/// CSR support graph of the policy-induced chain.
fn support_graph(kernel: &Kernel, ordinals: &[u32]) -> (Vec<u32>, Vec<u32>) {
    let n = kernel.n_states();
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    row_offsets.push(0u32);
    for (s, &ordinal) in ordinals.iter().enumerate() {
        let (next, _) = kernel.row(kernel.pair(s, ordinal as usize));
        cols.extend_from_slice(next);
        row_offsets.push(cols.len() as u32);
    }
    (row_offsets, cols)
}

/// Solves the evaluation equations for a policy given by action ordinals,
/// anchoring the bias at `ref_idx`.
pub(crate) fn evaluate_dense(
    kernel: &Kernel,
    ordinals: &[u32],
    ref_idx: usize,
) -> Result<DenseEvaluation, SolveError> {
    let n = kernel.n_states();
    if n > MAX_DENSE_STATES {
        return Err(SolveError::TooLargeForExactSolve {
            n_states: n,
            max: MAX_DENSE_STATES,
        });
    }

    let mut m = vec![0.0f64; n * n];
    let mut rewards = vec![0.0f64; n];
    for s in 0..n {
        let pair = kernel.pair(s, ordinals[s] as usize);
        let row = &mut m[s * n..(s + 1) * n];
        row[s] = 1.0;
        let (next, prob) = kernel.row(pair);
        for (&j, &p) in next.iter().zip(prob) {
            row[j as usize] -= p;
        }
        // Reference column carries the gain unknown instead of the pinned
        // bias entry.
        row[ref_idx] = 1.0;
        rewards[s] = kernel.expected_reward(pair);
    }

    let lu = lu_factor(m, n)?;
    let mut bias = lu.solve(&rewards);
    let gain = bias[ref_idx];
    bias[ref_idx] = 0.0;

    let mut e_ref = vec![0.0f64; n];
    e_ref[ref_idx] = 1.0;
    let stationary_raw = lu.solve_transpose(&e_ref);

    Ok(DenseEvaluation {
        gain,
        bias,
        stationary_raw,
    })
}

/// Exactly evaluates a policy: recurrence structure, stationary
/// distribution, and long-run average AoE.
///
/// Errors if the induced chain has more than one recurrent class, or if the
/// stationary solve fails its own nonnegativity/normalization/fixed-point
/// checks.
pub fn evaluate_policy_exact(
    kernel: &Kernel,
    policy: &PolicyKind,
) -> Result<EvalResult, SolveError> {
    let n = kernel.n_states();
    let ordinals = policy_ordinals(kernel, policy)?;

    let (row_offsets, cols) = support_graph(kernel, &ordinals);
    let components = strongly_connected_components(n, &row_offsets, &cols);
    let terminal = terminal_components(&components, &row_offsets, &cols);
    if terminal.len() != 1 {
        return Err(SolveError::MultipleRecurrentClasses {
            count: terminal.len(),
        });
    }
    let recurrent = terminal[0];
    let ref_idx = components
        .comp_of
        .iter()
        .position(|&c| c == recurrent)
        .expect("terminal component is nonempty");

    let evaluation = evaluate_dense(kernel, &ordinals, ref_idx)?;

    // Transient states carry exactly zero stationary mass; the solve leaves
    // only rounding dust there. Anything worse than dust on a state we know
    // is transient — or negative mass anywhere — is a numerical failure.
    let mut stationary = evaluation.stationary_raw;
    for (s, w) in stationary.iter_mut().enumerate() {
        if components.comp_of[s] != recurrent {
            *w = 0.0;
        } else if *w < 0.0 {
            if *w < -1e-8 {
                return Err(SolveError::StationaryNegativeMass {
                    state_index: s,
                    value: *w,
                });
            }
            *w = 0.0;
        }
    }
    let total: f64 = stationary.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(SolveError::StationaryInconsistent {
            residual: (total - 1.0).abs(),
        });
    }
    for w in stationary.iter_mut() {
        *w /= total;
    }

    // Fixed-point self-check: ||πP - π||_∞ under the policy's rows.
    let mut flow = vec![0.0f64; n];
    for s in 0..n {
        let w = stationary[s];
        if w != 0.0 {
            let (next, prob) = kernel.row(kernel.pair(s, ordinals[s] as usize));
            for (&j, &p) in next.iter().zip(prob) {
                flow[j as usize] += w * p;
            }
        }
    }
    let mut residual = 0.0f64;
    for s in 0..n {
        residual = residual.max((flow[s] - stationary[s]).abs());
    }
    if residual > 1e-8 {
        return Err(SolveError::StationaryInconsistent { residual });
    }

    // Average AoE = Σ_s π(s) · E[AoE' | s, π(s)] = -Σ_s π(s) R(s, π(s)).
    let mut avg_aoe = 0.0f64;
    for s in 0..n {
        if stationary[s] != 0.0 {
            avg_aoe -= stationary[s] * kernel.expected_reward(kernel.pair(s, ordinals[s] as usize));
        }
    }

    Ok(EvalResult {
        avg_aoe,
        stationary,
    })
}
