//! States, actions, action admissibility, and the dense state indexing
//! shared by every solver.
//!
//! A state bundles the two channel visibilities, the ages of the two stored
//! elementary links (or [`LINK_ABSENT`]), and the current age of
//! entanglement. The dense index enumerates states lexicographically by
//! `(v12, v23, m12, m23, delta_e)` with an absent link ordered before any
//! stored age, so index 0 is always "both channels invisible, no stored
//! links, AoE 1" — the conventional reference state of the solvers.

use alloc::vec::Vec;
use core::fmt;

/// Sentinel age meaning "no stored link pair".
pub const LINK_ABSENT: i32 = -1;

/// One slot of the controlled chain.
///
/// Stored link ages are either [`LINK_ABSENT`] or in `1..=cutoff`; an age of
/// zero never occurs because a pair generated in slot `t` is first usable —
/// and first observed — at age 1 in slot `t + 1`. The age of entanglement
/// `delta_e` lies in `1..=aoe_cap`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    /// Left channel (nodes 1-2) visible this slot.
    pub v12: bool,
    /// Right channel (nodes 2-3) visible this slot.
    pub v23: bool,
    /// Age of the stored left link pair, or [`LINK_ABSENT`].
    pub m12: i32,
    /// Age of the stored right link pair, or [`LINK_ABSENT`].
    pub m23: i32,
    /// Age of entanglement, `1..=aoe_cap`.
    pub delta_e: u32,
}

impl State {
    pub fn new(v12: bool, v23: bool, m12: i32, m23: i32, delta_e: u32) -> Self {
        Self {
            v12,
            v23,
            m12,
            m23,
            delta_e,
        }
    }

    /// Whether the left link has a stored pair.
    pub fn has_link12(&self) -> bool {
        self.m12 != LINK_ABSENT
    }

    /// Whether the right link has a stored pair.
    pub fn has_link23(&self) -> bool {
        self.m23 != LINK_ABSENT
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(v12={}, v23={}, m12={}, m23={}, dE={})",
            self.v12 as u8, self.v23 as u8, self.m12, self.m23, self.delta_e
        )
    }
}

/// One slot's control decision: generation requests per link plus an
/// optional swap attempt. The all-false value is "wait".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Action {
    /// Request elementary-link generation on the left link.
    pub gen12: bool,
    /// Request elementary-link generation on the right link.
    pub gen23: bool,
    /// Attempt the entanglement swap.
    pub swap: bool,
}

impl Action {
    /// Do nothing this slot.
    pub const WAIT: Action = Action {
        gen12: false,
        gen23: false,
        swap: false,
    };

    /// Attempt the swap (generation is never combined with it).
    pub const SWAP: Action = Action {
        gen12: false,
        gen23: false,
        swap: true,
    };

    /// Pure generation request on the selected links.
    pub const fn gen(gen12: bool, gen23: bool) -> Action {
        Action {
            gen12,
            gen23,
            swap: false,
        }
    }

    pub fn is_wait(&self) -> bool {
        *self == Action::WAIT
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.swap {
            write!(f, "swap")
        } else if self.is_wait() {
            write!(f, "wait")
        } else {
            write!(f, "gen({}, {})", self.gen12 as u8, self.gen23 as u8)
        }
    }
}

/// Which elementary link an error refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Link {
    /// The left link, between nodes 1 and 2.
    OneTwo,
    /// The right link, between nodes 2 and 3.
    TwoThree,
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Link::OneTwo => write!(f, "(1,2)"),
            Link::TwoThree => write!(f, "(2,3)"),
        }
    }
}

/// An action that violates one of the model's control gates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdmissibilityError {
    /// Generation was requested on a link whose channel is invisible.
    GenerationNeedsVisibility { link: Link },
    /// A swap was attempted without a stored pair on both links.
    SwapNeedsBothLinks { m12: i32, m23: i32 },
    /// A swap was combined with a generation request; the hardware can do
    /// only one of the two in a slot.
    SwapExcludesGeneration,
}

impl fmt::Display for AdmissibilityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdmissibilityError::GenerationNeedsVisibility { link } => {
                write!(f, "generation requested on link {link} while its channel is invisible")
            }
            AdmissibilityError::SwapNeedsBothLinks { m12, m23 } => write!(
                f,
                "swap attempted without both stored pairs (m12={m12}, m23={m23})"
            ),
            AdmissibilityError::SwapExcludesGeneration => {
                write!(f, "swap attempted in the same slot as a generation request")
            }
        }
    }
}

impl core::error::Error for AdmissibilityError {}

/// Checks every control gate and names the first one the action violates.
pub fn check_admissible(s: &State, a: &Action) -> Result<(), AdmissibilityError> {
    if a.gen12 && !s.v12 {
        return Err(AdmissibilityError::GenerationNeedsVisibility { link: Link::OneTwo });
    }
    if a.gen23 && !s.v23 {
        return Err(AdmissibilityError::GenerationNeedsVisibility {
            link: Link::TwoThree,
        });
    }
    if a.swap {
        if !(s.has_link12() && s.has_link23()) {
            return Err(AdmissibilityError::SwapNeedsBothLinks {
                m12: s.m12,
                m23: s.m23,
            });
        }
        if a.gen12 || a.gen23 {
            return Err(AdmissibilityError::SwapExcludesGeneration);
        }
    }
    Ok(())
}

/// All admissible actions in the canonical order: wait first, then the
/// generation combinations `(0,1)`, `(1,0)`, `(1,1)` restricted to visible
/// channels, then swap if both links hold a stored pair.
pub fn admissible_actions(s: &State) -> Vec<Action> {
    let mut actions = Vec::with_capacity(5);
    actions.push(Action::WAIT);
    for (gen12, gen23) in [(false, true), (true, false), (true, true)] {
        if (!gen12 || s.v12) && (!gen23 || s.v23) {
            actions.push(Action::gen(gen12, gen23));
        }
    }
    if s.has_link12() && s.has_link23() {
        actions.push(Action::SWAP);
    }
    actions
}

/// Advances a stored link age by one slot: an absent link stays absent, an
/// age that would exceed the cutoff is discarded (becomes absent), and any
/// other age increments.
///
/// Rejects ages that are not valid stored-link values to begin with (zero,
/// below [`LINK_ABSENT`], or above the cutoff).
pub fn age_link(age: i32, cutoff: u32) -> Result<i32, StateError> {
    if age == LINK_ABSENT {
        return Ok(LINK_ABSENT);
    }
    if age < 1 || age > cutoff as i32 {
        return Err(StateError::LinkAgeOutOfRange { age, cutoff });
    }
    if age == cutoff as i32 {
        Ok(LINK_ABSENT)
    } else {
        Ok(age + 1)
    }
}

/// A malformed state or out-of-range dense index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateError {
    /// A stored link age outside `{-1} ∪ 1..=cutoff` (zero included: a pair
    /// is never observed at age zero).
    LinkAgeOutOfRange { age: i32, cutoff: u32 },
    /// An age of entanglement outside `1..=aoe_cap`.
    AoeOutOfRange { delta_e: u32, aoe_cap: u32 },
    /// A dense index at or past the number of states.
    IndexOutOfRange { index: usize, len: usize },
}

impl fmt::Display for StateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateError::LinkAgeOutOfRange { age, cutoff } => write!(
                f,
                "link age {age} is outside {{-1}} ∪ 1..={cutoff}"
            ),
            StateError::AoeOutOfRange { delta_e, aoe_cap } => {
                write!(f, "age of entanglement {delta_e} is outside 1..={aoe_cap}")
            }
            StateError::IndexOutOfRange { index, len } => {
                write!(f, "state index {index} is out of range for {len} states")
            }
        }
    }
}

impl core::error::Error for StateError {}

/// The finite state space for one choice of cutoff and AoE cap, with a
/// bijective dense indexing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StateSpace {
    cutoff: u32,
    aoe_cap: u32,
}

impl StateSpace {
    pub fn new(params: &crate::params::ScenarioParams) -> Self {
        Self {
            cutoff: params.cutoff,
            aoe_cap: params.aoe_cap,
        }
    }

    pub fn from_parts(cutoff: u32, aoe_cap: u32) -> Self {
        Self { cutoff, aoe_cap }
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn aoe_cap(&self) -> u32 {
        self.aoe_cap
    }

    /// Number of states: `2 * 2 * (cutoff + 1)^2 * aoe_cap`.
    pub fn len(&self) -> usize {
        let ages = self.cutoff as usize + 1;
        4 * ages * ages * self.aoe_cap as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Validates that a state lies in this space.
    pub fn check(&self, s: &State) -> Result<(), StateError> {
        for age in [s.m12, s.m23] {
            if age != LINK_ABSENT && (age < 1 || age > self.cutoff as i32) {
                return Err(StateError::LinkAgeOutOfRange {
                    age,
                    cutoff: self.cutoff,
                });
            }
        }
        if s.delta_e < 1 || s.delta_e > self.aoe_cap {
            return Err(StateError::AoeOutOfRange {
                delta_e: s.delta_e,
                aoe_cap: self.aoe_cap,
            });
        }
        Ok(())
    }

    fn age_slot(age: i32) -> usize {
        if age == LINK_ABSENT {
            0
        } else {
            age as usize
        }
    }

    /// Dense index of a state; the inverse of [`StateSpace::state_at`].
    pub fn index(&self, s: &State) -> Result<usize, StateError> {
        self.check(s)?;
        let ages = self.cutoff as usize + 1;
        let mut idx = (s.v12 as usize) * 2 + s.v23 as usize;
        idx = idx * ages + Self::age_slot(s.m12);
        idx = idx * ages + Self::age_slot(s.m23);
        idx = idx * self.aoe_cap as usize + (s.delta_e as usize - 1);
        Ok(idx)
    }

    /// State at a dense index; the inverse of [`StateSpace::index`].
    pub fn state_at(&self, index: usize) -> Result<State, StateError> {
        if index >= self.len() {
            return Err(StateError::IndexOutOfRange {
                index,
                len: self.len(),
            });
        }
        let ages = self.cutoff as usize + 1;
        let mut rest = index;
        let delta_e = (rest % self.aoe_cap as usize) as u32 + 1;
        rest /= self.aoe_cap as usize;
        let slot23 = rest % ages;
        rest /= ages;
        let slot12 = rest % ages;
        rest /= ages;
        let v23 = rest % 2 == 1;
        let v12 = rest / 2 == 1;
        let unslot = |slot: usize| if slot == 0 { LINK_ABSENT } else { slot as i32 };
        Ok(State::new(v12, v23, unslot(slot12), unslot(slot23), delta_e))
    }

    /// All states in dense-index order.
    pub fn states(&self) -> impl Iterator<Item = State> + '_ {
        (0..self.len()).map(move |i| self.state_at(i).expect("index in range"))
    }
}
