//! The fully enumerated transition kernel: for every state, the admissible
//! actions in canonical order, and for every state/action pair the sparse
//! transition row and expected one-slot reward.
//!
//! Every solver in this crate walks the kernel rather than recomputing
//! transitions, so the model is enumerated exactly once per scenario.

use alloc::vec::Vec;

use crate::params::ScenarioParams;
use crate::state::{admissible_actions, Action, State, StateSpace};
use crate::transition::{transition, TransitionError};

/// Precomputed transition kernel over the dense state space.
#[derive(Clone, Debug)]
pub struct Kernel {
    space: StateSpace,
    params: ScenarioParams,
    /// Per state: offset into `actions`; length `n + 1`.
    action_offsets: Vec<u32>,
    /// Admissible actions of every state, canonical order, concatenated.
    actions: Vec<Action>,
    /// Per state/action pair: offset into `next`/`prob`; length
    /// `actions.len() + 1`.
    entry_offsets: Vec<u32>,
    /// Dense indices of successor states.
    next: Vec<u32>,
    /// Transition probabilities aligned with `next`.
    prob: Vec<f64>,
    /// Expected one-slot reward of every state/action pair.
    expected_reward: Vec<f64>,
}

impl Kernel {
    /// Enumerates the kernel for a validated parameter set.
    pub fn build(params: &ScenarioParams) -> Result<Kernel, TransitionError> {
        params.validate()?;
        let space = StateSpace::new(params);
        let n = space.len();

        let mut action_offsets = Vec::with_capacity(n + 1);
        let mut actions = Vec::new();
        let mut entry_offsets = Vec::new();
        let mut next = Vec::new();
        let mut prob = Vec::new();
        let mut expected_reward = Vec::new();

        action_offsets.push(0u32);
        entry_offsets.push(0u32);
        for s in space.states() {
            for a in admissible_actions(&s) {
                let dist = transition(&s, &a, params)?;
                for entry in dist.entries() {
                    next.push(space.index(&entry.state)? as u32);
                    prob.push(entry.prob);
                }
                expected_reward.push(dist.expected_reward());
                entry_offsets.push(next.len() as u32);
                actions.push(a);
            }
            action_offsets.push(actions.len() as u32);
        }

        Ok(Kernel {
            space,
            params: *params,
            action_offsets,
            actions,
            entry_offsets,
            next,
            prob,
            expected_reward,
        })
    }

    pub fn space(&self) -> StateSpace {
        self.space
    }

    pub fn params(&self) -> &ScenarioParams {
        &self.params
    }

    pub fn n_states(&self) -> usize {
        self.space.len()
    }

    /// Admissible actions of state `s` in canonical order.
    pub fn actions(&self, s: usize) -> &[Action] {
        let lo = self.action_offsets[s] as usize;
        let hi = self.action_offsets[s + 1] as usize;
        &self.actions[lo..hi]
    }

    /// Flat index of `(s, ordinal)` into the pair-indexed arrays.
    pub fn pair(&self, s: usize, ordinal: usize) -> usize {
        debug_assert!(ordinal < self.actions(s).len());
        self.action_offsets[s] as usize + ordinal
    }

    /// Ordinal of an action within `actions(s)`, if admissible there.
    pub fn action_ordinal(&self, s: usize, a: &Action) -> Option<usize> {
        self.actions(s).iter().position(|b| b == a)
    }

    /// Sparse transition row of a state/action pair.
    pub fn row(&self, pair: usize) -> (&[u32], &[f64]) {
        let lo = self.entry_offsets[pair] as usize;
        let hi = self.entry_offsets[pair + 1] as usize;
        (&self.next[lo..hi], &self.prob[lo..hi])
    }

    /// Expected one-slot reward of a state/action pair.
    pub fn expected_reward(&self, pair: usize) -> f64 {
        self.expected_reward[pair]
    }

    /// Action value `R(s, a) + Σ_s' P(s' | s, a) h(s')` for the pair.
    pub fn q_value(&self, pair: usize, h: &[f64]) -> f64 {
        let (next, prob) = self.row(pair);
        let mut q = self.expected_reward[pair];
        for (&j, &p) in next.iter().zip(prob) {
            q += p * h[j as usize];
        }
        q
    }

    /// Greedy sweep: for every state, the maximal action value and the first
    /// maximizing action (canonical order breaks ties).
    pub fn greedy(&self, h: &[f64], out_values: &mut [f64], out_actions: &mut [Action]) {
        for s in 0..self.n_states() {
            let mut best = f64::NEG_INFINITY;
            let mut best_action = Action::WAIT;
            for (ordinal, &a) in self.actions(s).iter().enumerate() {
                let q = self.q_value(self.pair(s, ordinal), h);
                if q > best {
                    best = q;
                    best_action = a;
                }
            }
            out_values[s] = best;
            out_actions[s] = best_action;
        }
    }

    /// Looks up the dense state index, mapping the error like the builders.
    pub fn state_index(&self, s: &State) -> Result<usize, TransitionError> {
        Ok(self.space.index(s)?)
    }
}
