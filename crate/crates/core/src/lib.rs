//! Model, solvers, and simulator for freshness-optimal scheduling of a
//! two-link quantum repeater chain with intermittently visible satellite
//! links.
//!
//! The chain has three nodes; the two elementary links are generated through
//! optical channels that flip between visible and invisible according to
//! independent two-state Markov chains. Stored link pairs age each slot and
//! are discarded past a cutoff; a successful entanglement swap consumes both
//! stored pairs and refreshes the end-to-end entanglement, whose staleness is
//! tracked by an integer age-of-entanglement (AoE) capped at a maximum. The
//! controller chooses, each slot, which visible links to (re)generate or
//! whether to attempt a swap, and the objective is the long-run average AoE.
//!
//! The crate is organized as:
//!
//! - [`params`]: scenario parameters and validation, plus the storage
//!   fidelity proxy.
//! - [`state`]: the finite state/action vocabulary and the dense state
//!   indexing used by every solver.
//! - [`transition`]: the one-slot probabilistic update for a single
//!   state/action pair.
//! - [`kernel`]: the fully enumerated transition kernel (sparse rows plus
//!   expected rewards) shared by the solvers.
//! - [`linalg`]: dense LU factorization used by exact policy evaluation.
//! - [`scc`]: strongly connected components of the policy-induced chain.
//! - [`rvi`]: relative value iteration for the average-reward optimality
//!   equation.
//! - [`policy_iteration`]: Howard policy iteration, used as an independent
//!   cross-check of the value-iteration solver.
//! - [`eval`]: exact policy evaluation (stationary distribution, gain, bias).
//! - [`reachability`]: certifies the single-recurrent-class structure that
//!   the average-reward machinery relies on.
//! - [`policies`]: the two scheduling heuristics and tabular (solver-derived)
//!   policies behind one dispatch type.
//! - [`sim`]: a seeded Monte Carlo simulator and single-trajectory replay.
//!
//! The crate is `no_std`-compatible (it requires `alloc`); float
//! transcendentals come from `libm` so results are identical with or without
//! the standard library.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod eval;
pub mod kernel;
pub mod linalg;
pub mod params;
pub mod policies;
pub mod policy_iteration;
pub mod reachability;
pub mod rvi;
pub mod scc;
pub mod sim;
pub mod state;
pub mod transition;

pub use eval::{evaluate_policy_exact, EvalResult};
pub use kernel::Kernel;
pub use params::{fidelity, ParamsError, ScenarioParams, VisibilityChain};
pub use policies::{act_greedy, act_wait_until_ready, PolicyError, PolicyKind, TabularPolicy};
pub use policy_iteration::policy_iteration_solve;
pub use reachability::{check_unichain_reachability, ReachabilityReport};
pub use rvi::{bellman_residual, rvi_solve, IterationStat, SolveConfig, SolveError, SolveResult};
pub use sim::{
    derive_seed, replay, simulate, InitialStateRule, SimConfig, SimError, SimReport, SlotRecord,
};
pub use state::{
    admissible_actions, age_link, check_admissible, Action, AdmissibilityError, Link, State,
    StateError, StateSpace, LINK_ABSENT,
};
pub use transition::{transition, TransitionDistribution, TransitionEntry, TransitionError};
