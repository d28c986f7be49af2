//! Scheduling policies: the two rule-based heuristics and tabular policies
//! produced by the solvers, all behind one dispatch type.

use alloc::vec::Vec;
use core::fmt;

use crate::state::{
    check_admissible, Action, AdmissibilityError, State, StateError, StateSpace,
};

/// Greedy generate-and-swap-as-soon-as-possible.
///
/// If both links hold a stored pair the swap is attempted immediately;
/// otherwise generation is requested on every visible channel (dropping and
/// refreshing a pair the link may already store). With nothing visible and
/// nothing swappable it waits.
pub fn act_greedy(s: &State) -> Action {
    if s.has_link12() && s.has_link23() {
        Action::SWAP
    } else {
        Action::gen(s.v12, s.v23)
    }
}

/// Wait-until-ready with an age threshold.
///
/// Rules, in order:
///
/// 1. exactly one link stored and its age exceeds `threshold`: the pair is
///    considered stale — regenerate it if its own channel is visible, else
///    wait;
/// 2. both links stored: swap (even if one pair is past the threshold);
/// 3. exactly one link stored, age within the threshold: under `strict_wait`
///    (the default) the policy idles, literally waiting for the partner
///    link; with `strict_wait` disabled it instead requests generation on
///    the missing link when that channel is visible — a permissive variant
///    that still never regenerates a link it already holds;
/// 4. no links stored: request generation on every visible channel.
pub fn act_wait_until_ready(s: &State, threshold: u32, strict_wait: bool) -> Action {
    let stored = (s.has_link12(), s.has_link23());
    match stored {
        (true, true) => Action::SWAP,
        (false, false) => Action::gen(s.v12, s.v23),
        (true, false) | (false, true) => {
            let only12 = stored.0;
            let (age, own_visible, other_visible) = if only12 {
                (s.m12, s.v12, s.v23)
            } else {
                (s.m23, s.v23, s.v12)
            };
            if age > threshold as i32 {
                // Stale lone pair: refresh it or wait for its channel.
                if own_visible {
                    Action::gen(only12, !only12)
                } else {
                    Action::WAIT
                }
            } else if strict_wait {
                Action::WAIT
            } else if other_visible {
                Action::gen(!only12, only12)
            } else {
                Action::WAIT
            }
        }
    }
}

/// A dense state-indexed action table, as produced by the solvers.
#[derive(Clone, Debug, PartialEq)]
pub struct TabularPolicy {
    space: StateSpace,
    actions: Vec<Action>,
}

impl TabularPolicy {
    /// Wraps an action table after checking it covers the whole space and
    /// every entry passes the admissibility gates of its state.
    pub fn new(space: StateSpace, actions: Vec<Action>) -> Result<Self, PolicyError> {
        if actions.len() != space.len() {
            return Err(PolicyError::WrongTableLength {
                expected: space.len(),
                got: actions.len(),
            });
        }
        for (i, s) in space.states().enumerate() {
            check_admissible(&s, &actions[i]).map_err(|violation| {
                PolicyError::InadmissibleEntry {
                    state: s,
                    action: actions[i],
                    violation,
                }
            })?;
        }
        Ok(Self { space, actions })
    }

    pub fn space(&self) -> StateSpace {
        self.space
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    /// Action this table prescribes in `s`; errors on a state outside the
    /// table's space.
    pub fn act(&self, s: &State) -> Result<Action, PolicyError> {
        let idx = self
            .space
            .index(s)
            .map_err(PolicyError::UnknownState)?;
        Ok(self.actions[idx])
    }
}

/// Any policy the toolkit can evaluate, simulate, or compare.
#[derive(Clone, Debug)]
pub enum PolicyKind {
    /// A solver-derived table (reported under the name `rvi`).
    Optimal(TabularPolicy),
    /// The greedy generate-and-swap heuristic.
    GreedyGenSwapAsap,
    /// The wait-until-ready heuristic with its age threshold.
    WaitUntilReady { threshold: u32, strict_wait: bool },
}

impl PolicyKind {
    /// Wait-until-ready with a scenario's configured threshold and the
    /// default strict idle rule (a lone stored pair waits for its partner
    /// rather than triggering generation on the missing link).
    pub fn wait_until_ready(params: &crate::params::ScenarioParams) -> Self {
        PolicyKind::WaitUntilReady {
            threshold: params.wur_cutoff,
            strict_wait: true,
        }
    }

    /// Stable identifier used in result tables: `rvi`, `greedy`, or `wur`.
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Optimal(_) => "rvi",
            PolicyKind::GreedyGenSwapAsap => "greedy",
            PolicyKind::WaitUntilReady { .. } => "wur",
        }
    }

    pub fn act(&self, s: &State) -> Result<Action, PolicyError> {
        match self {
            PolicyKind::Optimal(table) => table.act(s),
            PolicyKind::GreedyGenSwapAsap => Ok(act_greedy(s)),
            PolicyKind::WaitUntilReady {
                threshold,
                strict_wait,
            } => Ok(act_wait_until_ready(s, *threshold, *strict_wait)),
        }
    }
}

/// A policy that cannot act on the requested state space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PolicyError {
    /// The queried state lies outside the policy's table.
    UnknownState(StateError),
    /// The action table does not cover the state space.
    WrongTableLength { expected: usize, got: usize },
    /// A table entry violates its state's admissibility gates.
    InadmissibleEntry {
        state: State,
        action: Action,
        violation: AdmissibilityError,
    },
}

impl fmt::Display for PolicyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyError::UnknownState(e) => write!(f, "state outside the policy table: {e}"),
            PolicyError::WrongTableLength { expected, got } => {
                write!(f, "policy table has {got} entries, the space has {expected} states")
            }
            PolicyError::InadmissibleEntry {
                state,
                action,
                violation,
            } => write!(
                f,
                "policy table prescribes {action} in {state}: {violation}"
            ),
        }
    }
}

impl core::error::Error for PolicyError {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{admissible_actions, LINK_ABSENT};

    #[test]
    fn greedy_swaps_whenever_both_pairs_exist() {
        // Visibility is irrelevant to the swap decision.
        for (v12, v23) in [(false, false), (true, false), (false, true), (true, true)] {
            let s = State::new(v12, v23, 2, 5, 9);
            assert_eq!(act_greedy(&s), Action::SWAP);
        }
    }

    #[test]
    fn greedy_generates_on_every_visible_channel() {
        let s = State::new(true, true, LINK_ABSENT, LINK_ABSENT, 3);
        assert_eq!(act_greedy(&s), Action::gen(true, true));
        let s = State::new(false, true, LINK_ABSENT, LINK_ABSENT, 3);
        assert_eq!(act_greedy(&s), Action::gen(false, true));
        // A lone stored pair on a visible channel is refreshed greedily.
        let s = State::new(true, true, 4, LINK_ABSENT, 3);
        assert_eq!(act_greedy(&s), Action::gen(true, true));
        let s = State::new(false, false, 4, LINK_ABSENT, 3);
        assert_eq!(act_greedy(&s), Action::WAIT);
    }

    #[test]
    fn wait_until_ready_swaps_when_both_pairs_exist() {
        // Rule 2 beats the staleness rule: an over-threshold pair still
        // swaps when its partner arrived.
        let s = State::new(false, false, 5, 1, 9);
        assert_eq!(act_wait_until_ready(&s, 4, false), Action::SWAP);
        assert_eq!(act_wait_until_ready(&s, 4, true), Action::SWAP);
    }

    #[test]
    fn wait_until_ready_refreshes_a_stale_lone_pair() {
        // Age 5 > threshold 4, own channel visible: regenerate it.
        let s = State::new(true, false, 5, LINK_ABSENT, 9);
        assert_eq!(act_wait_until_ready(&s, 4, false), Action::gen(true, false));
        // Own channel invisible: nothing to do but wait, even though the
        // other channel is visible.
        let s = State::new(false, true, 5, LINK_ABSENT, 9);
        assert_eq!(act_wait_until_ready(&s, 4, false), Action::WAIT);
        // Mirror image on the right link.
        let s = State::new(false, true, LINK_ABSENT, 5, 9);
        assert_eq!(act_wait_until_ready(&s, 4, false), Action::gen(false, true));
    }

    #[test]
    fn wait_until_ready_completes_a_fresh_lone_pair() {
        // Age 4 == threshold is still fresh (staleness is strict).
        let s = State::new(false, true, 4, LINK_ABSENT, 9);
        assert_eq!(act_wait_until_ready(&s, 4, false), Action::gen(false, true));
        // Missing side invisible: wait.
        let s = State::new(true, false, 4, LINK_ABSENT, 9);
        assert_eq!(act_wait_until_ready(&s, 4, false), Action::WAIT);
        // Strict-wait idles instead of completing.
        let s = State::new(false, true, 4, LINK_ABSENT, 9);
        assert_eq!(act_wait_until_ready(&s, 4, true), Action::WAIT);
    }

    #[test]
    fn wait_until_ready_generates_from_nothing() {
        let s = State::new(true, true, LINK_ABSENT, LINK_ABSENT, 9);
        assert_eq!(act_wait_until_ready(&s, 4, false), Action::gen(true, true));
        let s = State::new(true, false, LINK_ABSENT, LINK_ABSENT, 9);
        assert_eq!(act_wait_until_ready(&s, 4, false), Action::gen(true, false));
        let s = State::new(false, false, LINK_ABSENT, LINK_ABSENT, 9);
        assert_eq!(act_wait_until_ready(&s, 4, false), Action::WAIT);
        // Strict-wait only affects the lone-pair rule.
        let s = State::new(true, true, LINK_ABSENT, LINK_ABSENT, 9);
        assert_eq!(act_wait_until_ready(&s, 4, true), Action::gen(true, true));
    }

    #[test]
    fn heuristics_are_always_admissible() {
        let space = StateSpace::from_parts(6, 12);
        for s in space.states() {
            check_admissible(&s, &act_greedy(&s)).unwrap();
            for strict in [false, true] {
                for threshold in [1, 4, 6] {
                    check_admissible(&s, &act_wait_until_ready(&s, threshold, strict)).unwrap();
                }
            }
        }
    }

    #[test]
    fn tabular_policies_validate_their_table() {
        let space = StateSpace::from_parts(2, 4);
        let wait_everywhere: Vec<Action> =
            space.states().map(|_| Action::WAIT).collect();
        let table = TabularPolicy::new(space, wait_everywhere).unwrap();
        let s = State::new(true, false, 1, LINK_ABSENT, 2);
        assert_eq!(table.act(&s).unwrap(), Action::WAIT);

        // Wrong length.
        assert!(matches!(
            TabularPolicy::new(space, alloc::vec![Action::WAIT; 3]),
            Err(PolicyError::WrongTableLength { .. })
        ));

        // Swap prescribed where no pairs exist.
        let bad: Vec<Action> = space.states().map(|_| Action::SWAP).collect();
        assert!(matches!(
            TabularPolicy::new(space, bad),
            Err(PolicyError::InadmissibleEntry { .. })
        ));

        // Out-of-space lookup.
        let other = State::new(true, false, 1, LINK_ABSENT, 99);
        assert!(matches!(
            table.act(&other),
            Err(PolicyError::UnknownState(_))
        ));
    }

    #[test]
    fn dispatch_names_and_delegation() {
        let space = StateSpace::from_parts(2, 4);
        let table = TabularPolicy::new(
            space,
            space.states().map(|s| act_greedy(&s)).collect(),
        )
        .unwrap();
        let s = State::new(true, true, 1, 1, 2);

        let optimal = PolicyKind::Optimal(table);
        assert_eq!(optimal.name(), "rvi");
        assert_eq!(optimal.act(&s).unwrap(), Action::SWAP);

        let greedy = PolicyKind::GreedyGenSwapAsap;
        assert_eq!(greedy.name(), "greedy");
        assert_eq!(greedy.act(&s).unwrap(), act_greedy(&s));

        let wur = PolicyKind::WaitUntilReady {
            threshold: 4,
            strict_wait: false,
        };
        assert_eq!(wur.name(), "wur");
        assert_eq!(wur.act(&s).unwrap(), Action::SWAP);

        let params = crate::params::ScenarioParams::default();
        assert!(matches!(
            PolicyKind::wait_until_ready(&params),
            PolicyKind::WaitUntilReady {
                threshold: 4,
                strict_wait: true
            }
        ));
    }

    #[test]
    fn heuristic_actions_appear_in_the_admissible_list() {
        let space = StateSpace::from_parts(3, 8);
        for s in space.states() {
            let actions = admissible_actions(&s);
            assert!(actions.contains(&act_greedy(&s)));
            assert!(actions.contains(&act_wait_until_ready(&s, 2, false)));
        }
    }
}
