//! Scenario files: the TOML schema, its validation, and resolution of named
//! built-in scenarios.
//!
//! A scenario file has top-level `id` and `policies` plus four tables:
//! `[params]` (required model parameters), `[solver]`, `[sim]`, and exactly
//! one experiment axis — `[sweep]` for parameter sweeps or `[convergence]`
//! for solver-trace cells. Unknown keys anywhere are rejected.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use aoe_core::{ParamsError, ScenarioParams, SimConfig, VisibilityChain};
use serde::Deserialize;

/// Scenario files compiled into the binary, keyed by name. `resolve_scenario`
/// prefers an on-disk `scenarios/<name>.toml` over these so the shipped
/// copies stay editable.
pub const BUILTIN_SCENARIOS: &[(&str, &str)] = &[
    ("baseline", include_str!("../scenarios/baseline.toml")),
    ("fig1", include_str!("../scenarios/fig1.toml")),
    ("fig2", include_str!("../scenarios/fig2.toml")),
    ("fig3", include_str!("../scenarios/fig3.toml")),
    ("fig4", include_str!("../scenarios/fig4.toml")),
];

/// The policy names a scenario may list, in their canonical report order.
pub const POLICY_NAMES: &[&str] = &["rvi", "greedy", "wur"];

fn default_policies() -> Vec<String> {
    POLICY_NAMES.iter().map(|s| s.to_string()).collect()
}

/// One parsed scenario file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    /// Identifier written into every result row; must be CSV-safe.
    pub id: String,
    /// Policies to run, in report order; defaults to all three.
    #[serde(default = "default_policies")]
    pub policies: Vec<String>,
    pub params: ParamsSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub sim: SimSection,
    pub sweep: Option<SweepSection>,
    pub convergence: Option<ConvergenceSection>,
}

/// `[params]` — the model parameters. Matrix rows are
/// `[[stay-invisible, become-visible], [become-invisible, stay-visible]]`.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub p_gen: f64,
    pub p_swap: f64,
    pub vis12: [[f64; 2]; 2],
    pub vis23: [[f64; 2]; 2],
    #[serde(default = "d_cutoff")]
    pub cutoff: u32,
    #[serde(default = "d_aoe_cap")]
    pub aoe_cap: u32,
    #[serde(default = "d_coherence_time")]
    pub coherence_time: f64,
    #[serde(default = "d_wur_cutoff")]
    pub wur_cutoff: u32,
    /// Lone-pair rule of the wait-until-ready heuristic: `true` idles until
    /// the partner link exists, `false` requests generation on the missing
    /// side when visible.
    #[serde(default = "d_wur_strict_wait")]
    pub wur_strict_wait: bool,
}

fn d_cutoff() -> u32 {
    5
}
fn d_aoe_cap() -> u32 {
    30
}
fn d_coherence_time() -> f64 {
    10.0
}
fn d_wur_cutoff() -> u32 {
    4
}
fn d_wur_strict_wait() -> bool {
    true
}

impl ParamsSection {
    /// Builds and validates the model parameters.
    pub fn to_params(&self) -> Result<ScenarioParams, ConfigError> {
        let p = ScenarioParams {
            p_gen: self.p_gen,
            p_swap: self.p_swap,
            vis12: VisibilityChain::new(self.vis12).map_err(ConfigError::Params)?,
            vis23: VisibilityChain::new(self.vis23).map_err(ConfigError::Params)?,
            cutoff: self.cutoff,
            aoe_cap: self.aoe_cap,
            coherence_time: self.coherence_time,
            wur_cutoff: self.wur_cutoff,
        };
        p.validate().map_err(ConfigError::Params)?;
        Ok(p)
    }
}

/// `[solver]` — value-iteration settings.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "d_epsilon")]
    pub epsilon: f64,
    #[serde(default = "d_max_iters")]
    pub max_iters: usize,
}

fn d_epsilon() -> f64 {
    1e-8
}
fn d_max_iters() -> usize {
    100_000
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            epsilon: d_epsilon(),
            max_iters: d_max_iters(),
        }
    }
}

/// `[sim]` — Monte Carlo settings.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default = "d_horizon")]
    pub horizon: u64,
    #[serde(default = "d_warmup")]
    pub warmup: u64,
    #[serde(default = "d_replications")]
    pub replications: u32,
    #[serde(default = "d_base_seed")]
    pub base_seed: u64,
}

fn d_horizon() -> u64 {
    200_000
}
fn d_warmup() -> u64 {
    2_000
}
fn d_replications() -> u32 {
    20
}
fn d_base_seed() -> u64 {
    1
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            horizon: d_horizon(),
            warmup: d_warmup(),
            replications: d_replications(),
            base_seed: d_base_seed(),
        }
    }
}

impl SimSection {
    /// Monte Carlo configuration with the given seed (the section's
    /// `base_seed` unless overridden on the command line, then mixed
    /// per experiment cell).
    pub fn to_sim_config(&self, seed: u64) -> SimConfig {
        SimConfig {
            horizon: self.horizon,
            warmup: self.warmup,
            replications: self.replications,
            base_seed: seed,
            ..SimConfig::default()
        }
    }
}

/// `[sweep]` — one swept parameter and its grid.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// `"p_gen"` or `"p_swap"`.
    pub parameter: String,
    pub values: Vec<f64>,
}

/// `[convergence]` — labelled solver-trace cells.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSection {
    pub cells: Vec<ConvergenceCell>,
}

/// One convergence cell: a label plus the reliability pair it traces.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceCell {
    pub label: String,
    pub p_gen: f64,
    pub p_swap: f64,
}

impl ScenarioFile {
    /// Parses and fully validates a scenario from TOML text. `origin` names
    /// the source in errors (a path or a built-in name).
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let file: ScenarioFile = toml::from_str(text).map_err(|err| ConfigError::Parse {
            origin: origin.to_string(),
            message: err.to_string(),
        })?;
        file.validate()?;
        Ok(file)
    }

    /// Checks everything the type system does not: CSV-safe identifiers,
    /// known policy names, parameter domains, and sweep/convergence shape.
    pub fn validate(&self) -> Result<(), ConfigError> {
        csv_safe("id", &self.id)?;
        if self.policies.is_empty() {
            return Err(invalid("`policies` must list at least one policy"));
        }
        for name in &self.policies {
            if !POLICY_NAMES.contains(&name.as_str()) {
                return Err(invalid(format!(
                    "unknown policy {name:?}; expected one of {POLICY_NAMES:?}"
                )));
            }
        }
        for (i, name) in self.policies.iter().enumerate() {
            if self.policies[..i].contains(name) {
                return Err(invalid(format!("policy {name:?} listed twice")));
            }
        }
        self.params.to_params()?;
        if self.solver.epsilon <= 0.0 || !self.solver.epsilon.is_finite() {
            return Err(invalid("`solver.epsilon` must be positive and finite"));
        }
        if self.solver.max_iters == 0 {
            return Err(invalid("`solver.max_iters` must be positive"));
        }
        if self.sim.horizon == 0 || self.sim.warmup >= self.sim.horizon {
            return Err(invalid(
                "`sim` needs horizon > 0 and warmup < horizon",
            ));
        }
        if self.sim.replications == 0 {
            return Err(invalid("`sim.replications` must be positive"));
        }
        if self.sweep.is_some() && self.convergence.is_some() {
            return Err(invalid(
                "a scenario may define `[sweep]` or `[convergence]`, not both",
            ));
        }
        if let Some(sweep) = &self.sweep {
            if !matches!(sweep.parameter.as_str(), "p_gen" | "p_swap") {
                return Err(invalid(format!(
                    "`sweep.parameter` must be \"p_gen\" or \"p_swap\", got {:?}",
                    sweep.parameter
                )));
            }
            if sweep.values.is_empty() {
                return Err(invalid("`sweep.values` must not be empty"));
            }
            for &v in &sweep.values {
                if !(0.0..=1.0).contains(&v) {
                    return Err(invalid(format!(
                        "sweep value {v} outside the probability range [0, 1]"
                    )));
                }
            }
        }
        if let Some(conv) = &self.convergence {
            if conv.cells.is_empty() {
                return Err(invalid("`convergence.cells` must not be empty"));
            }
            for (i, cell) in conv.cells.iter().enumerate() {
                csv_safe("convergence cell label", &cell.label)?;
                if conv.cells[..i].iter().any(|c| c.label == cell.label) {
                    return Err(invalid(format!(
                        "convergence label {:?} listed twice",
                        cell.label
                    )));
                }
                for (what, v) in [("p_gen", cell.p_gen), ("p_swap", cell.p_swap)] {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(invalid(format!(
                            "convergence cell {:?}: {what} = {v} outside [0, 1]",
                            cell.label
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Model parameters at the scenario's base point.
    pub fn base_params(&self) -> Result<ScenarioParams, ConfigError> {
        self.params.to_params()
    }

    /// Model parameters with the sweep parameter overridden to `value`.
    /// Errors if the scenario has no `[sweep]` table.
    pub fn sweep_params(&self, value: f64) -> Result<ScenarioParams, ConfigError> {
        let sweep = self.sweep.as_ref().ok_or(ConfigError::MissingSection {
            section: "sweep",
            id: self.id.clone(),
        })?;
        let mut section = self.params;
        match sweep.parameter.as_str() {
            "p_gen" => section.p_gen = value,
            "p_swap" => section.p_swap = value,
            other => {
                return Err(invalid(format!(
                    "`sweep.parameter` must be \"p_gen\" or \"p_swap\", got {other:?}"
                )))
            }
        }
        section.to_params()
    }

    /// Model parameters with both reliabilities overridden (convergence
    /// cells).
    pub fn cell_params(&self, cell: &ConvergenceCell) -> Result<ScenarioParams, ConfigError> {
        let mut section = self.params;
        section.p_gen = cell.p_gen;
        section.p_swap = cell.p_swap;
        section.to_params()
    }
}

fn csv_safe(what: &str, value: &str) -> Result<(), ConfigError> {
    if value.is_empty() {
        return Err(invalid(format!("{what} must not be empty")));
    }
    if value.contains([',', '"', '\n', '\r']) {
        return Err(invalid(format!(
            "{what} {value:?} contains a character that would corrupt CSV output"
        )));
    }
    Ok(())
}

fn invalid(what: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { what: what.into() }
}

/// Loads, parses, and validates a scenario file from disk.
pub fn load_scenario_file(path: &Path) -> Result<ScenarioFile, ConfigError> {
    let text = fs::read_to_string(path).map_err(|err| ConfigError::Io {
        path: path.to_path_buf(),
        err,
    })?;
    ScenarioFile::from_toml(&text, &path.display().to_string())
}

/// Finds the scenario to run.
///
/// Precedence: an explicit `--config` path wins; otherwise `name` is tried
/// as a TOML path (when it looks like one), then as `scenarios/<name>.toml`
/// in the working directory, then as a compiled-in built-in. With neither
/// given, the built-in `baseline` is used.
pub fn resolve_scenario(
    config: Option<&Path>,
    name: Option<&str>,
) -> Result<ScenarioFile, ConfigError> {
    if let Some(path) = config {
        return load_scenario_file(path);
    }
    let name = name.unwrap_or("baseline");
    let looks_like_path =
        name.ends_with(".toml") || name.contains(std::path::MAIN_SEPARATOR) || name.contains('/');
    if looks_like_path {
        return load_scenario_file(Path::new(name));
    }
    let local = PathBuf::from("scenarios").join(format!("{name}.toml"));
    if local.is_file() {
        return load_scenario_file(&local);
    }
    match BUILTIN_SCENARIOS.iter().find(|(n, _)| *n == name) {
        Some((_, text)) => ScenarioFile::from_toml(text, &format!("built-in {name}")),
        None => Err(ConfigError::UnknownScenario {
            name: name.to_string(),
        }),
    }
}

/// A configuration problem: unreadable, unparsable, or invalid scenario
/// input. Always the user's to fix (exit code 2).
#[derive(Debug)]
pub enum ConfigError {
    Io { path: PathBuf, err: io::Error },
    Parse { origin: String, message: String },
    Params(ParamsError),
    Invalid { what: String },
    UnknownScenario { name: String },
    MissingSection { section: &'static str, id: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, err } => {
                write!(f, "cannot read {}: {err}", path.display())
            }
            ConfigError::Parse { origin, message } => {
                write!(f, "cannot parse {origin}: {message}")
            }
            ConfigError::Params(e) => write!(f, "invalid model parameters: {e}"),
            ConfigError::Invalid { what } => write!(f, "invalid scenario: {what}"),
            ConfigError::UnknownScenario { name } => {
                let known: Vec<&str> = BUILTIN_SCENARIOS.iter().map(|(n, _)| *n).collect();
                write!(
                    f,
                    "unknown scenario {name:?}; built-ins are {known:?} and paths must end in .toml"
                )
            }
            ConfigError::MissingSection { section, id } => {
                write!(f, "scenario {id:?} has no `[{section}]` table")
            }
        }
    }
}

impl std::error::Error for ConfigError {}
