//! Scenario files: every input of a solve/calibrate/simulate run in one TOML
//! document.
//!
//! A file may start from a built-in scenario with `base = "<name>"` and
//! override individual keys; tables are merged key by key.
//!
//! ```toml
//! name = "cheap-trials"
//! base = "baseline-2025"
//!
//! [cost.structural]
//! cost_per_obs = 20000.0
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::calibrate::CalibrationConfig;
use crate::error::{ensure, Error, Result};
use crate::model::{rct_welfare, CostSpec, PriorSpec, Structural, UtilitySpec};
use crate::simulator::{SimConfig, DEFAULT_THRESHOLDS};
use crate::solver::GridSpec;

const BUILTINS: [(&str, &str); 3] = [
    ("baseline-2025", include_str!("../scenarios/baseline-2025.toml")),
    ("approval-only", include_str!("../scenarios/approval-only.toml")),
    ("welfare-only", include_str!("../scenarios/welfare-only.toml")),
];

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTINS.iter().map(|(n, _)| *n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSettings {
    pub rho_steps: usize,
    pub m_bar_sds: f64,
    pub rho_max_frac: f64,
}

impl Default for GridSettings {
    fn default() -> Self {
        GridSettings {
            rho_steps: 4000,
            m_bar_sds: 6.0,
            rho_max_frac: 0.999,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSettings {
    pub paths: usize,
    pub seed: u64,
    /// Simulation steps across `[0, ϱ₀]`.
    pub rho_steps: usize,
    pub xi: f64,
    pub thresholds: Vec<f64>,
    pub bins: usize,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            paths: 100_000,
            seed: 2025,
            rho_steps: 20_000,
            xi: 0.0,
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
            bins: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum V0Mode {
    /// `value` is a multiple of the fixed-horizon trial welfare.
    Multiple,
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct V0Spec {
    pub mode: V0Mode,
    pub value: f64,
}

impl Default for V0Spec {
    fn default() -> Self {
        V0Spec {
            mode: V0Mode::Multiple,
            value: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BernoulliSettings {
    pub theta0: f64,
    /// Prior scale for the arm success rates; `None` means `ϱ₀/2`.
    pub nu2: Option<f64>,
    /// Approval-boundary inflation as a multiple of `σ`.
    pub xi_sigma: f64,
    /// Time cap; `None` runs to the end of the boundary grid.
    pub horizon: Option<f64>,
    pub n_list: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
}

impl Default for BernoulliSettings {
    fn default() -> Self {
        BernoulliSettings {
            theta0: 0.5,
            nu2: None,
            xi_sigma: 0.05,
            horizon: None,
            n_list: vec![50, 100, 200, 400],
            reps: 10_000,
            seed: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub prior: PriorSpec,
    #[serde(rename = "utility")]
    pub util: UtilitySpec,
    pub cost: CostSpec,
    pub grid: GridSettings,
    pub sim: SimSettings,
    pub v0: V0Spec,
    pub calibration: CalibrationConfig,
    pub bernoulli: BernoulliSettings,
}

/// On-disk layout; the cost table may give `c` directly or only the
/// structural inputs.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    #[serde(default)]
    base: Option<String>,
    prior: PriorSpec,
    utility: UtilitySpec,
    cost: CostFile,
    #[serde(default)]
    grid: GridSettings,
    #[serde(default)]
    sim: SimSettings,
    #[serde(default)]
    v0: V0Spec,
    #[serde(default)]
    calibration: CalibrationConfig,
    #[serde(default)]
    bernoulli: BernoulliSettings,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostFile {
    c: Option<f64>,
    structural: Option<Structural>,
}

fn config_err(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

/// Overlays `top` onto `base`, recursing into tables.
fn merge(base: &mut Table, top: Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn parse_table(text: &str, origin: &str) -> Result<Table> {
    text.parse::<Table>().map_err(|e| config_err(origin, e.to_string()))
}

/// Resolves `base` chains and returns the merged table.
fn resolve(text: &str, origin: &str, depth: usize) -> Result<Table> {
    let mut table = parse_table(text, origin)?;
    let Some(base) = table.remove("base") else {
        return Ok(table);
    };
    let base = base
        .as_str()
        .ok_or_else(|| config_err("base", "must be a string naming a built-in scenario"))?
        .to_owned();
    if depth > 4 {
        return Err(config_err("base", "inheritance chain is too deep"));
    }
    let (_, builtin) = BUILTINS.iter().find(|(n, _)| *n == base).ok_or_else(|| {
        let known: Vec<_> = builtin_names().collect();
        config_err(
            "base",
            format!("unknown built-in `{base}`; known: {}", known.join(", ")),
        )
    })?;
    let mut merged = resolve(builtin, &base, depth + 1)?;
    merge(&mut merged, table);
    Ok(merged)
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_named(text, "scenario")
    }

    fn from_toml_named(text: &str, origin: &str) -> Result<Self> {
        let table = resolve(text, origin, 0)?;
        let file: ScenarioFile = table
            .try_into()
            .map_err(|e: toml::de::Error| config_err(origin, e.to_string()))?;
        debug_assert!(file.base.is_none());
        let cost = match (file.cost.c, file.cost.structural) {
            (Some(c), s) => CostSpec { c, structural: s },
            (None, Some(s)) => CostSpec::from_structural(s)?,
            (None, None) => return Err(config_err("cost", "give either `c` or a [cost.structural] table")),
        };
        let s = Scenario {
            name: file.name,
            prior: file.prior,
            util: file.utility,
            cost,
            grid: file.grid,
            sim: file.sim,
            v0: file.v0,
            calibration: file.calibration,
            bernoulli: file.bernoulli,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_named(&text, &path.display().to_string())
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let (_, text) = BUILTINS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| config_err("scenario", format!("unknown built-in `{name}`")))?;
        Self::from_toml_named(text, name)
    }

    /// A built-in name or a path to a scenario file.
    pub fn load(spec: &str) -> Result<Self> {
        if builtin_names().any(|n| n == spec) {
            Self::builtin(spec)
        } else {
            Self::from_path(Path::new(spec))
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(
            !self.name.is_empty()
                && self
                    .name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.')),
            "name",
            || format!("`{}` must be non-empty and use only [A-Za-z0-9._-]", self.name),
        )?;
        self.prior.validate()?;
        self.util.validate()?;
        self.cost.validate()?;
        self.grid_spec()?;
        self.sim_config().validate(self.prior.varrho0)?;
        self.calibration.validate()?;
        let b = &self.bernoulli;
        ensure(b.theta0 > 0.0 && b.theta0 < 1.0, "bernoulli.theta0", || {
            format!("must lie in (0, 1), got {}", b.theta0)
        })?;
        ensure(b.xi_sigma > 0.0, "bernoulli.xi_sigma", || {
            format!("must be positive, got {}", b.xi_sigma)
        })?;
        Ok(())
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::with_resolution(
            self.prior.varrho0,
            self.grid.rho_steps,
            self.grid.m_bar_sds,
            self.grid.rho_max_frac,
        )
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            n_paths: self.sim.paths,
            seed: self.sim.seed,
            rho_step: self.prior.varrho0 / self.sim.rho_steps as f64,
            xi: self.sim.xi,
            thresholds: self.sim.thresholds.clone(),
            bins: self.sim.bins,
            true_effect: None,
        }
    }

    /// Fixed-horizon trial welfare under this scenario's prior.
    pub fn rct_welfare(&self) -> Result<f64> {
        rct_welfare(self.prior.m0, &self.prior, self.util.alpha)
    }

    /// Welfare floor in utility units.
    pub fn v0_target(&self) -> Result<f64> {
        Ok(match self.v0.mode {
            V0Mode::Absolute => self.v0.value,
            V0Mode::Multiple => self.v0.value * self.rct_welfare()?,
        })
    }

    /// Serialises back to the on-disk layout (without inheritance).
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| config_err("scenario", e.to_string()))
    }
}
