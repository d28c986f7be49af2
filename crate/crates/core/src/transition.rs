//! The one-slot probabilistic update for a single state/action pair.
//!
//! Given the current state and an admissible action, the next state is the
//! product of independent mechanisms:
//!
//! - each channel's visibility moves according to its two-state chain;
//! - a link with a generation request holds a fresh pair of age 1 next slot
//!   with probability `p_gen` and is empty otherwise — any pair it already
//!   stored is dropped by the attempt;
//! - a link without a generation request ages by one slot and is discarded
//!   past the cutoff ([`crate::state::age_link`]);
//! - a swap consumes both stored pairs regardless of outcome; on success
//!   (probability `p_swap`) the age of entanglement resets to the sum of the
//!   consumed pair ages, otherwise it increments; both values are clamped to
//!   the cap;
//! - without a successful swap the age of entanglement increments (clamped).
//!
//! The per-transition reward is the negated next age of entanglement, so
//! maximizing average reward minimizes average AoE.

use alloc::vec::Vec;

use crate::params::{ParamsError, ScenarioParams};
use crate::state::{
    age_link, check_admissible, Action, AdmissibilityError, State, StateError, StateSpace,
    LINK_ABSENT,
};

/// One support point of a transition distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitionEntry {
    pub state: State,
    pub prob: f64,
    /// Negated next age of entanglement.
    pub reward: i64,
}

/// A one-slot transition distribution: support points sorted by dense state
/// index, duplicates merged, zero-probability outcomes omitted.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionDistribution {
    entries: Vec<TransitionEntry>,
}

impl TransitionDistribution {
    pub fn entries(&self) -> &[TransitionEntry] {
        &self.entries
    }

    /// Sum of all support probabilities (1 up to float rounding).
    pub fn total_prob(&self) -> f64 {
        self.entries.iter().map(|e| e.prob).sum()
    }

    pub fn expected_reward(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.prob * e.reward as f64)
            .sum()
    }

    /// Expected next age of entanglement (the negated expected reward).
    pub fn expected_next_aoe(&self) -> f64 {
        -self.expected_reward()
    }
}

/// A transition request that violates the model contract.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TransitionError {
    InvalidParams(ParamsError),
    InvalidState(StateError),
    Inadmissible(AdmissibilityError),
}

impl core::fmt::Display for TransitionError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TransitionError::InvalidParams(e) => write!(f, "invalid parameters: {e}"),
            TransitionError::InvalidState(e) => write!(f, "invalid state: {e}"),
            TransitionError::Inadmissible(e) => write!(f, "inadmissible action: {e}"),
        }
    }
}

impl core::error::Error for TransitionError {}

impl From<ParamsError> for TransitionError {
    fn from(e: ParamsError) -> Self {
        TransitionError::InvalidParams(e)
    }
}

impl From<StateError> for TransitionError {
    fn from(e: StateError) -> Self {
        TransitionError::InvalidState(e)
    }
}

impl From<AdmissibilityError> for TransitionError {
    fn from(e: AdmissibilityError) -> Self {
        TransitionError::Inadmissible(e)
    }
}

/// Possible next values of one link's stored age, with probabilities.
fn link_branches(
    age: i32,
    requested: bool,
    p_gen: f64,
    cutoff: u32,
) -> Result<Vec<(i32, f64)>, StateError> {
    let mut branches = Vec::with_capacity(2);
    if requested {
        // The attempt drops whatever was stored, then succeeds or not.
        if p_gen > 0.0 {
            branches.push((1, p_gen));
        }
        if p_gen < 1.0 {
            branches.push((LINK_ABSENT, 1.0 - p_gen));
        }
    } else {
        branches.push((age_link(age, cutoff)?, 1.0));
    }
    Ok(branches)
}

/// Computes the exact one-slot transition distribution for `(s, a)`.
///
/// Errors on invalid parameters, a state outside the parameter-induced
/// space, and inadmissible actions (naming the violated gate).
pub fn transition(
    s: &State,
    a: &Action,
    params: &ScenarioParams,
) -> Result<TransitionDistribution, TransitionError> {
    params.validate()?;
    let space = StateSpace::new(params);
    space.check(s)?;
    check_admissible(s, a)?;

    let v12_branches: Vec<(bool, f64)> = [(false, 0), (true, 1)]
        .iter()
        .map(|&(v, col)| (v, params.vis12.row(s.v12)[col]))
        .filter(|&(_, p)| p > 0.0)
        .collect();
    let v23_branches: Vec<(bool, f64)> = [(false, 0), (true, 1)]
        .iter()
        .map(|&(v, col)| (v, params.vis23.row(s.v23)[col]))
        .filter(|&(_, p)| p > 0.0)
        .collect();

    // Joint branches over (m12', m23', delta_e'), which are not independent
    // under a swap (the reset consumes both pairs at once).
    let incremented = (s.delta_e + 1).min(params.aoe_cap);
    let mut core_branches: Vec<(i32, i32, u32, f64)> = Vec::with_capacity(4);
    if a.swap {
        let reset = ((s.m12 + s.m23) as u32).min(params.aoe_cap);
        if params.p_swap > 0.0 {
            core_branches.push((LINK_ABSENT, LINK_ABSENT, reset, params.p_swap));
        }
        if params.p_swap < 1.0 {
            core_branches.push((LINK_ABSENT, LINK_ABSENT, incremented, 1.0 - params.p_swap));
        }
    } else {
        let m12_branches = link_branches(s.m12, a.gen12, params.p_gen, params.cutoff)?;
        let m23_branches = link_branches(s.m23, a.gen23, params.p_gen, params.cutoff)?;
        for &(m12, p12) in &m12_branches {
            for &(m23, p23) in &m23_branches {
                core_branches.push((m12, m23, incremented, p12 * p23));
            }
        }
    }

    let mut outcomes: Vec<(usize, TransitionEntry)> =
        Vec::with_capacity(v12_branches.len() * v23_branches.len() * core_branches.len());
    for &(v12, p_v12) in &v12_branches {
        for &(v23, p_v23) in &v23_branches {
            for &(m12, m23, delta_e, p_core) in &core_branches {
                let next = State::new(v12, v23, m12, m23, delta_e);
                let index = space.index(&next)?;
                outcomes.push((
                    index,
                    TransitionEntry {
                        state: next,
                        prob: p_v12 * p_v23 * p_core,
                        reward: -(delta_e as i64),
                    },
                ));
            }
        }
    }

    outcomes.sort_unstable_by_key(|(index, _)| *index);
    let mut entries: Vec<TransitionEntry> = Vec::with_capacity(outcomes.len());
    let mut last_index = usize::MAX;
    for (index, entry) in outcomes {
        if index == last_index {
            entries.last_mut().expect("nonempty on duplicate").prob += entry.prob;
        } else {
            entries.push(entry);
            last_index = index;
        }
    }
    Ok(TransitionDistribution { entries })
}
