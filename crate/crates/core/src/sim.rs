//! Seeded Monte Carlo simulation of a policy on a scenario, plus a
//! single-trajectory replay for debugging and dumps.
//!
//! Randomness is a counter-based ChaCha stream cipher RNG: replication `r`
//! uses the generator seeded with `base_seed` on stream `r`, so every
//! replication is independent, reproducible, and independent of how many
//! replications run. Within a slot, draws happen in a fixed documented
//! order — left visibility, right visibility, left generation, right
//! generation, swap — with draws for mechanisms that are not active this
//! slot skipped entirely.

use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::params::{ParamsError, ScenarioParams};
use crate::policies::{PolicyError, PolicyKind};
use crate::state::{
    age_link, check_admissible, Action, AdmissibilityError, State, StateError, StateSpace,
    LINK_ABSENT,
};

/// How a replication picks its first state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialStateRule {
    /// Start exactly here.
    Fixed(State),
    /// No stored pairs, AoE 1, and each channel's visibility drawn from its
    /// chain's long-run distribution (two extra draws before the first
    /// slot, left channel first).
    StationaryVisibility,
}

/// Simulation settings.
#[derive(Clone, Copy, Debug)]
pub struct SimConfig {
    /// Slots simulated per replication.
    pub horizon: u64,
    /// Leading slots excluded from every statistic.
    pub warmup: u64,
    /// Independent replications (ChaCha streams `0..replications`).
    pub replications: u32,
    /// Seed shared by all replications; streams separate them.
    pub base_seed: u64,
    /// First-state rule for every replication.
    pub initial: InitialStateRule,
}

impl Default for SimConfig {
    /// Defaults: horizon 200_000, warmup 2_000, 20 replications, seed 1,
    /// stationary-visibility start.
    fn default() -> Self {
        Self {
            horizon: 200_000,
            warmup: 2_000,
            replications: 20,
            base_seed: 1,
            initial: InitialStateRule::StationaryVisibility,
        }
    }
}

/// Aggregated Monte Carlo estimates.
#[derive(Clone, Debug)]
pub struct SimReport {
    /// Mean over replications of the per-replication average post-warmup
    /// AoE.
    pub avg_aoe: f64,
    /// Standard error of that mean across replications (0 for a single
    /// replication).
    pub stderr: f64,
    /// Successful swaps divided by swap attempts, post-warmup, pooled over
    /// replications; 0 when no attempt was made.
    pub swap_success_rate: f64,
    /// Mean AoE reset value over successful post-warmup swaps, when any.
    pub mean_reset_value: Option<f64>,
    /// Downsampled `(slot, AoE)` trace of replication 0 (post-slot values,
    /// at most ~1024 points).
    pub aoe_trajectory: Vec<(u64, u32)>,
}

/// One slot of a replayed trajectory: the state the controller saw, what it
/// did, and whether a swap attempt succeeded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlotRecord {
    pub t: u64,
    pub state: State,
    pub action: Action,
    pub swap_success: bool,
}

/// A simulation request that cannot run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SimError {
    /// Horizon, warmup, or replication settings are unusable.
    InvalidConfig { what: &'static str },
    Params(ParamsError),
    State(StateError),
    Policy(PolicyError),
    /// The policy emitted an action its state does not admit; the dump
    /// carries everything needed to reproduce the decision.
    Inadmissible {
        state: State,
        action: Action,
        violation: AdmissibilityError,
    },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::InvalidConfig { what } => write!(f, "invalid simulation config: {what}"),
            SimError::Params(e) => write!(f, "invalid parameters: {e}"),
            SimError::State(e) => write!(f, "invalid state: {e}"),
            SimError::Policy(e) => write!(f, "policy failed: {e}"),
            SimError::Inadmissible {
                state,
                action,
                violation,
            } => write!(
                f,
                "policy emitted inadmissible action {action} in state {state}: {violation}"
            ),
        }
    }
}

impl core::error::Error for SimError {}

impl From<ParamsError> for SimError {
    fn from(e: ParamsError) -> Self {
        SimError::Params(e)
    }
}

impl From<StateError> for SimError {
    fn from(e: StateError) -> Self {
        SimError::State(e)
    }
}

impl From<PolicyError> for SimError {
    fn from(e: PolicyError) -> Self {
        SimError::Policy(e)
    }
}

/// Mixes a base seed with coordinates (for example sweep point and policy
/// slot) into an independent-looking seed, so experiment cells do not share
/// random streams. SplitMix64-style finalization.
pub fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    let mut z = base
        .wrapping_add(a.wrapping_mul(0x9e3779b97f4a7c15))
        .wrapping_add(b.wrapping_mul(0xbf58476d1ce4e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// What the swap mechanism did in one slot.
struct SwapOutcome {
    attempted: bool,
    success: bool,
    reset_value: u32,
}

/// Draws one slot's randomness and returns the next state. Draw order:
/// left visibility, right visibility, left generation, right generation,
/// swap; inactive mechanisms draw nothing.
fn step(
    params: &ScenarioParams,
    s: &State,
    a: &Action,
    rng: &mut ChaCha12Rng,
) -> Result<(State, SwapOutcome), SimError> {
    check_admissible(s, a).map_err(|violation| SimError::Inadmissible {
        state: *s,
        action: *a,
        violation,
    })?;

    let v12 = rng.gen_bool(params.vis12.prob_next_visible(s.v12));
    let v23 = rng.gen_bool(params.vis23.prob_next_visible(s.v23));

    let mut outcome = SwapOutcome {
        attempted: false,
        success: false,
        reset_value: 0,
    };
    let (m12, m23, delta_e);
    if a.swap {
        outcome.attempted = true;
        outcome.success = rng.gen_bool(params.p_swap);
        m12 = LINK_ABSENT;
        m23 = LINK_ABSENT;
        if outcome.success {
            let reset = ((s.m12 + s.m23) as u32).min(params.aoe_cap);
            outcome.reset_value = reset;
            delta_e = reset;
        } else {
            delta_e = (s.delta_e + 1).min(params.aoe_cap);
        }
    } else {
        m12 = if a.gen12 {
            if rng.gen_bool(params.p_gen) {
                1
            } else {
                LINK_ABSENT
            }
        } else {
            age_link(s.m12, params.cutoff)?
        };
        m23 = if a.gen23 {
            if rng.gen_bool(params.p_gen) {
                1
            } else {
                LINK_ABSENT
            }
        } else {
            age_link(s.m23, params.cutoff)?
        };
        delta_e = (s.delta_e + 1).min(params.aoe_cap);
    }
    Ok((State::new(v12, v23, m12, m23, delta_e), outcome))
}

fn initial_state(
    params: &ScenarioParams,
    rule: &InitialStateRule,
    space: &StateSpace,
    rng: &mut ChaCha12Rng,
) -> Result<State, SimError> {
    match rule {
        InitialStateRule::Fixed(s) => {
            space.check(s)?;
            Ok(*s)
        }
        InitialStateRule::StationaryVisibility => {
            let v12 = rng.gen_bool(params.vis12.stationary_visible());
            let v23 = rng.gen_bool(params.vis23.stationary_visible());
            Ok(State::new(v12, v23, LINK_ABSENT, LINK_ABSENT, 1))
        }
    }
}

fn validate_sim_config(cfg: &SimConfig) -> Result<(), SimError> {
    if cfg.replications == 0 {
        return Err(SimError::InvalidConfig {
            what: "at least one replication is required",
        });
    }
    if cfg.horizon == 0 {
        return Err(SimError::InvalidConfig {
            what: "horizon must be at least one slot",
        });
    }
    if cfg.warmup >= cfg.horizon {
        return Err(SimError::InvalidConfig {
            what: "warmup must be shorter than the horizon",
        });
    }
    Ok(())
}

/// Simulates a policy and aggregates post-warmup statistics across
/// replications.
pub fn simulate(
    params: &ScenarioParams,
    policy: &PolicyKind,
    cfg: &SimConfig,
) -> Result<SimReport, SimError> {
    params.validate()?;
    validate_sim_config(cfg)?;
    let space = StateSpace::new(params);
    let counted_slots = (cfg.horizon - cfg.warmup) as f64;

    let mut rep_means: Vec<f64> = Vec::with_capacity(cfg.replications as usize);
    let mut swap_attempts = 0u64;
    let mut swap_successes = 0u64;
    let mut reset_sum = 0u64;
    let mut trajectory: Vec<(u64, u32)> = Vec::new();
    let trajectory_stride = cfg.horizon.div_ceil(1024).max(1);

    for replication in 0..cfg.replications {
        let mut rng = ChaCha12Rng::seed_from_u64(cfg.base_seed);
        rng.set_stream(replication as u64);
        let mut s = initial_state(params, &cfg.initial, &space, &mut rng)?;
        let mut aoe_sum = 0u64;

        for t in 0..cfg.horizon {
            let a = policy.act(&s)?;
            let (next, outcome) = step(params, &s, &a, &mut rng)?;
            if t >= cfg.warmup {
                aoe_sum += next.delta_e as u64;
                if outcome.attempted {
                    swap_attempts += 1;
                    if outcome.success {
                        swap_successes += 1;
                        reset_sum += outcome.reset_value as u64;
                    }
                }
            }
            if replication == 0 && t % trajectory_stride == 0 {
                trajectory.push((t + 1, next.delta_e));
            }
            s = next;
        }
        rep_means.push(aoe_sum as f64 / counted_slots);
    }

    let r = rep_means.len() as f64;
    let avg_aoe = rep_means.iter().sum::<f64>() / r;
    let stderr = if rep_means.len() >= 2 {
        let var = rep_means
            .iter()
            .map(|m| (m - avg_aoe) * (m - avg_aoe))
            .sum::<f64>()
            / (r - 1.0);
        libm::sqrt(var / r)
    } else {
        0.0
    };

    Ok(SimReport {
        avg_aoe,
        stderr,
        swap_success_rate: if swap_attempts == 0 {
            0.0
        } else {
            swap_successes as f64 / swap_attempts as f64
        },
        mean_reset_value: if swap_successes == 0 {
            None
        } else {
            Some(reset_sum as f64 / swap_successes as f64)
        },
        aoe_trajectory: trajectory,
    })
}

/// Replays one full trajectory (stream 0 of the seed, stationary-visibility
/// start — the same slots replication 0 of [`simulate`] sees with the same
/// seed) and records every slot.
pub fn replay(
    params: &ScenarioParams,
    policy: &PolicyKind,
    seed: u64,
    horizon: u64,
) -> Result<Vec<SlotRecord>, SimError> {
    params.validate()?;
    if horizon == 0 {
        return Err(SimError::InvalidConfig {
            what: "horizon must be at least one slot",
        });
    }
    let space = StateSpace::new(params);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(0);
    let mut s = initial_state(
        params,
        &InitialStateRule::StationaryVisibility,
        &space,
        &mut rng,
    )?;
    let mut records = Vec::with_capacity(horizon as usize);
    for t in 0..horizon {
        let a = policy.act(&s)?;
        let (next, outcome) = step(params, &s, &a, &mut rng)?;
        records.push(SlotRecord {
            t,
            state: s,
            action: a,
            swap_success: outcome.success,
        });
        s = next;
    }
    Ok(records)
}
