//! Scenario parameters: link/swap success probabilities, visibility chains,
//! storage cutoff, AoE cap, and the coherence-time proxy for stored-pair
//! quality.

use core::fmt;

/// Two-state Markov chain governing one optical channel's visibility.
///
/// Row 0 is the distribution of the next visibility given the channel is
/// currently invisible, row 1 given it is visible; column 0 is "next
/// invisible", column 1 "next visible".
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VisibilityChain {
    matrix: [[f64; 2]; 2],
}

impl VisibilityChain {
    /// Validates and wraps a 2x2 row-stochastic matrix. Each row must sum to
    /// one within `1e-12` and every entry must lie in `[0, 1]`.
    pub fn new(matrix: [[f64; 2]; 2]) -> Result<Self, ParamsError> {
        for (row_idx, row) in matrix.iter().enumerate() {
            for (col_idx, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    return Err(ParamsError::VisibilityEntryOutOfRange {
                        row: row_idx,
                        col: col_idx,
                        value: p,
                    });
                }
            }
            let sum = row[0] + row[1];
            if (sum - 1.0).abs() > 1e-12 {
                return Err(ParamsError::VisibilityRowNotStochastic { row: row_idx, sum });
            }
        }
        Ok(Self { matrix })
    }

    /// The raw transition matrix.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        self.matrix
    }

    /// Transition row out of the given visibility value.
    pub fn row(&self, visible: bool) -> [f64; 2] {
        self.matrix[visible as usize]
    }

    /// Probability that the channel is visible next slot.
    pub fn prob_next_visible(&self, visible: bool) -> f64 {
        self.matrix[visible as usize][1]
    }

    /// Probability of staying invisible for one more slot. A strictly
    /// positive value here is one premise of the single-recurrent-class
    /// argument (see [`crate::reachability`]).
    pub fn invisible_self_loop(&self) -> f64 {
        self.matrix[0][0]
    }

    /// Long-run probability of being visible. For the degenerate chain with
    /// no transitions in either direction (the identity matrix) the
    /// stationary distribution is not unique; this returns `0.5` in that
    /// case.
    pub fn stationary_visible(&self) -> f64 {
        let to_visible = self.matrix[0][1];
        let to_invisible = self.matrix[1][0];
        let total = to_visible + to_invisible;
        if total == 0.0 {
            0.5
        } else {
            to_visible / total
        }
    }
}

/// Full parameter set for one scenario.
///
/// Fields are public for ergonomic literal construction; call
/// [`ScenarioParams::validate`] before feeding a hand-built value to the
/// model. All model entry points validate on their own as well.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScenarioParams {
    /// Success probability of one elementary-link generation attempt.
    pub p_gen: f64,
    /// Success probability of an entanglement swap attempt.
    pub p_swap: f64,
    /// Visibility chain of the channel serving the left link (nodes 1-2).
    pub vis12: VisibilityChain,
    /// Visibility chain of the channel serving the right link (nodes 2-3).
    pub vis23: VisibilityChain,
    /// Maximum storable link age; older pairs are discarded.
    pub cutoff: u32,
    /// Cap on the age of entanglement.
    pub aoe_cap: u32,
    /// Coherence-time constant of the memories, in slots. Only used by the
    /// fidelity proxy, not by the dynamics.
    pub coherence_time: f64,
    /// Age threshold of the wait-until-ready heuristic: a lone stored link
    /// older than this is treated as not worth waiting on.
    pub wur_cutoff: u32,
}

impl Default for ScenarioParams {
    /// Baseline parameters: cutoff 5, AoE cap 30, coherence time 10 slots,
    /// wait-until-ready threshold 4, swap success 0.8, generation success
    /// 0.5, and weather-like visibility rows `[0.3, 0.7]` on both channels.
    fn default() -> Self {
        let vis = VisibilityChain::new([[0.3, 0.7], [0.3, 0.7]]).expect("static matrix");
        Self {
            p_gen: 0.5,
            p_swap: 0.8,
            vis12: vis,
            vis23: vis,
            cutoff: 5,
            aoe_cap: 30,
            coherence_time: 10.0,
            wur_cutoff: 4,
        }
    }
}

impl ScenarioParams {
    /// Checks every invariant the model relies on:
    ///
    /// - `p_gen`, `p_swap` in `[0, 1]`;
    /// - both visibility matrices already validated by construction;
    /// - `cutoff >= 1`;
    /// - `aoe_cap >= 2 * cutoff`, so a swap reset value never exceeds the
    ///   cap;
    /// - `coherence_time > 0`;
    /// - `wur_cutoff >= 1`.
    pub fn validate(&self) -> Result<(), ParamsError> {
        if !(0.0..=1.0).contains(&self.p_gen) {
            return Err(ParamsError::ProbabilityOutOfRange {
                name: "p_gen",
                value: self.p_gen,
            });
        }
        if !(0.0..=1.0).contains(&self.p_swap) {
            return Err(ParamsError::ProbabilityOutOfRange {
                name: "p_swap",
                value: self.p_swap,
            });
        }
        if self.cutoff == 0 {
            return Err(ParamsError::ZeroCutoff);
        }
        if self.aoe_cap < 2 * self.cutoff {
            return Err(ParamsError::AoeCapBelowSwapRange {
                aoe_cap: self.aoe_cap,
                min_required: 2 * self.cutoff,
            });
        }
        // Negated form on purpose: NaN must fail this check too.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.coherence_time > 0.0) {
            return Err(ParamsError::NonPositiveCoherenceTime {
                value: self.coherence_time,
            });
        }
        if self.wur_cutoff == 0 {
            return Err(ParamsError::ZeroWurCutoff);
        }
        Ok(())
    }

    /// Fidelity proxy of a stored pair of the given age, using this
    /// scenario's coherence time.
    pub fn fidelity(&self, age: u32) -> f64 {
        libm::exp(-(age as f64) / self.coherence_time)
    }
}

/// Exponential-decay fidelity proxy `exp(-age / coherence_time)` for a
/// stored entangled pair.
///
/// Returns an error if `coherence_time` is not strictly positive.
pub fn fidelity(age: u32, coherence_time: f64) -> Result<f64, ParamsError> {
    // Negated form on purpose: NaN must fail this check too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(coherence_time > 0.0) {
        return Err(ParamsError::NonPositiveCoherenceTime {
            value: coherence_time,
        });
    }
    Ok(libm::exp(-(age as f64) / coherence_time))
}

/// Rejected scenario parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ParamsError {
    /// A scalar probability left `[0, 1]`.
    ProbabilityOutOfRange { name: &'static str, value: f64 },
    /// A visibility-matrix entry left `[0, 1]`.
    VisibilityEntryOutOfRange { row: usize, col: usize, value: f64 },
    /// A visibility-matrix row does not sum to one.
    VisibilityRowNotStochastic { row: usize, sum: f64 },
    /// The storage cutoff must be at least one slot.
    ZeroCutoff,
    /// The AoE cap is too small to hold every swap reset value.
    AoeCapBelowSwapRange { aoe_cap: u32, min_required: u32 },
    /// The coherence time must be strictly positive.
    NonPositiveCoherenceTime { value: f64 },
    /// The wait-until-ready age threshold must be at least one slot.
    ZeroWurCutoff,
}

impl fmt::Display for ParamsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamsError::ProbabilityOutOfRange { name, value } => {
                write!(f, "{name} = {value} is outside [0, 1]")
            }
            ParamsError::VisibilityEntryOutOfRange { row, col, value } => write!(
                f,
                "visibility matrix entry ({row}, {col}) = {value} is outside [0, 1]"
            ),
            ParamsError::VisibilityRowNotStochastic { row, sum } => write!(
                f,
                "visibility matrix row {row} sums to {sum}, expected 1 within 1e-12"
            ),
            ParamsError::ZeroCutoff => write!(f, "storage cutoff must be at least 1"),
            ParamsError::AoeCapBelowSwapRange {
                aoe_cap,
                min_required,
            } => write!(
                f,
                "AoE cap {aoe_cap} is below 2 * cutoff = {min_required}, so a swap reset \
                 could overflow the cap"
            ),
            ParamsError::NonPositiveCoherenceTime { value } => {
                write!(f, "coherence time {value} must be strictly positive")
            }
            ParamsError::ZeroWurCutoff => {
                write!(f, "wait-until-ready age threshold must be at least 1")
            }
        }
    }
}

impl core::error::Error for ParamsError {}

#[cfg(test)]
// Test fixtures mutate a default value so the deviating fields stand out.
#[allow(clippy::field_reassign_with_default)]
mod tests {
    use super::*;

    fn chain(matrix: [[f64; 2]; 2]) -> VisibilityChain {
        VisibilityChain::new(matrix).unwrap()
    }

    #[test]
    fn default_params_validate() {
        ScenarioParams::default().validate().unwrap();
    }

    #[test]
    fn fidelity_matches_exponential_decay() {
        // exp(-10/10) = e^-1 and exp(-20/10) = e^-2.
        let e1 = fidelity(10, 10.0).unwrap();
        let e2 = fidelity(20, 10.0).unwrap();
        assert!((e1 - 0.36787944117144233).abs() < 1e-15);
        assert!((e2 - 0.1353352832366127).abs() < 1e-15);
        assert_eq!(fidelity(0, 10.0).unwrap(), 1.0);
        // The method form must agree with the free function.
        let params = ScenarioParams::default();
        assert_eq!(params.fidelity(7), fidelity(7, 10.0).unwrap());
    }

    #[test]
    fn fidelity_rejects_nonpositive_coherence_time() {
        assert!(matches!(
            fidelity(3, 0.0),
            Err(ParamsError::NonPositiveCoherenceTime { .. })
        ));
        assert!(matches!(
            fidelity(3, -2.0),
            Err(ParamsError::NonPositiveCoherenceTime { .. })
        ));
    }

    #[test]
    fn visibility_rows_must_be_stochastic() {
        assert!(matches!(
            VisibilityChain::new([[0.5, 0.6], [0.3, 0.7]]),
            Err(ParamsError::VisibilityRowNotStochastic { row: 0, .. })
        ));
        assert!(matches!(
            VisibilityChain::new([[0.5, 0.5], [-0.1, 1.1]]),
            Err(ParamsError::VisibilityEntryOutOfRange { row: 1, col: 0, .. })
        ));
    }

    #[test]
    fn stationary_visibility_of_two_state_chain() {
        // For rows [[0.3, 0.7], [0.3, 0.7]] the chain is i.i.d. with
        // P(visible) = 0.7.
        let c = chain([[0.3, 0.7], [0.3, 0.7]]);
        assert!((c.stationary_visible() - 0.7).abs() < 1e-15);
        // Persistent chain [[0.6, 0.4], [0.4, 0.6]]: stationary 0.5.
        let c = chain([[0.6, 0.4], [0.4, 0.6]]);
        assert!((c.stationary_visible() - 0.5).abs() < 1e-15);
        // Degenerate identity chain: defined fallback of 0.5.
        let c = chain([[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(c.stationary_visible(), 0.5);
    }

    #[test]
    fn validate_rejects_out_of_range_scalars() {
        let mut p = ScenarioParams::default();
        p.p_gen = 1.5;
        assert!(matches!(
            p.validate(),
            Err(ParamsError::ProbabilityOutOfRange { name: "p_gen", .. })
        ));

        let mut p = ScenarioParams::default();
        p.p_swap = -0.1;
        assert!(matches!(
            p.validate(),
            Err(ParamsError::ProbabilityOutOfRange { name: "p_swap", .. })
        ));

        let mut p = ScenarioParams::default();
        p.cutoff = 0;
        assert!(matches!(p.validate(), Err(ParamsError::ZeroCutoff)));

        let mut p = ScenarioParams::default();
        p.aoe_cap = 9; // 2 * cutoff = 10
        assert!(matches!(
            p.validate(),
            Err(ParamsError::AoeCapBelowSwapRange {
                aoe_cap: 9,
                min_required: 10
            })
        ));

        let mut p = ScenarioParams::default();
        p.coherence_time = 0.0;
        assert!(matches!(
            p.validate(),
            Err(ParamsError::NonPositiveCoherenceTime { .. })
        ));

        let mut p = ScenarioParams::default();
        p.wur_cutoff = 0;
        assert!(matches!(p.validate(), Err(ParamsError::ZeroWurCutoff)));
    }

    #[test]
    fn boundary_probabilities_are_accepted() {
        let mut p = ScenarioParams::default();
        p.p_gen = 0.0;
        p.p_swap = 1.0;
        p.validate().unwrap();
        // Deterministic visibility rows are legal too.
        VisibilityChain::new([[0.0, 1.0], [0.0, 1.0]]).unwrap();
    }
}
