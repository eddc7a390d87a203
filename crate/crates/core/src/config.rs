//! Scenario configuration: flat `key = value` files with `#` comments.
//!
//! Every key is optional; omitted keys take the outbreak defaults. Initial
//! susceptible humans, aquatic mosquitoes and susceptible mosquitoes are
//! derived from the population parameters unless given explicitly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::error::{ModelError, ScheduleError};
use crate::integrator::DEFAULT_STEP;
use crate::model::{human_total, ModelParameters, StateVector};
use crate::schedule::ControlSchedule;

pub const DEFAULT_HORIZON: f64 = 84.0;
pub const DEFAULT_EXPOSED_HUMANS: f64 = 216.0;
pub const DEFAULT_INFECTED_HUMANS: f64 = 434.0;

/// Recognized keys, in the order [`ScenarioConfig::to_config_string`] writes them.
pub const KEYS: [&str; 25] = [
    "N_h", "B", "beta_mh", "beta_hm", "mu_h", "eta_h", "mu_m", "mu_b", "mu_A", "eta_A", "eta_m", "nu_h", "m", "k",
    "S_h0", "E_h0", "I_h0", "R_h0", "A_m0", "S_m0", "E_m0", "I_m0", "horizon", "step", "schedule",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Malformed { line: usize, text: String },
    #[error("unknown key `{key}`; valid keys: {}", KEYS.join(", "))]
    UnknownKey { key: String },
    #[error("key `{key}`: `{value}` is not a finite number")]
    InvalidNumber { key: String, value: String },
    #[error("key `schedule`: {0}")]
    Schedule(#[from] ScheduleError),
    #[error("invalid parameters: {0}")]
    Parameters(#[from] ModelError),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

/// Everything needed to run one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub params: ModelParameters,
    pub initial: StateVector,
    pub horizon: f64,
    pub step: f64,
    pub schedule: ControlSchedule,
}

impl Default for ScenarioConfig {
    /// The outbreak scenario without control.
    fn default() -> Self {
        ScenarioBuilder::default().build().expect("defaults are valid")
    }
}

/// Accumulates `key = value` assignments; later assignments win.
#[derive(Debug, Clone)]
pub struct ScenarioBuilder {
    params: ModelParameters,
    exposed_humans: f64,
    infected_humans: f64,
    recovered_humans: f64,
    exposed_mosquitoes: f64,
    infected_mosquitoes: f64,
    susceptible_humans: Option<f64>,
    aquatic_mosquitoes: Option<f64>,
    susceptible_mosquitoes: Option<f64>,
    horizon: f64,
    step: f64,
    schedule: ControlSchedule,
}

impl Default for ScenarioBuilder {
    fn default() -> Self {
        Self {
            params: ModelParameters::cape_verde_2009(),
            exposed_humans: DEFAULT_EXPOSED_HUMANS,
            infected_humans: DEFAULT_INFECTED_HUMANS,
            recovered_humans: 0.0,
            exposed_mosquitoes: 0.0,
            infected_mosquitoes: 0.0,
            susceptible_humans: None,
            aquatic_mosquitoes: None,
            susceptible_mosquitoes: None,
            horizon: DEFAULT_HORIZON,
            step: DEFAULT_STEP,
            schedule: ControlSchedule::Zero,
        }
    }
}

impl ScenarioBuilder {
    pub fn set(&mut self, key: &str, value: &str) -> Result<&mut Self, ConfigError> {
        let value = value.trim();
        if key == "schedule" {
            self.schedule = value.parse()?;
            return Ok(self);
        }
        let slot: &mut f64 = match key {
            "N_h" => &mut self.params.human_population,
            "B" => &mut self.params.biting_rate,
            "beta_mh" => &mut self.params.mosquito_to_human_transmission,
            "beta_hm" => &mut self.params.human_to_mosquito_transmission,
            "mu_h" => &mut self.params.human_mortality,
            "eta_h" => &mut self.params.human_recovery,
            "mu_m" => &mut self.params.mosquito_mortality,
            "mu_b" => &mut self.params.egg_deposit_rate,
            "mu_A" => &mut self.params.larval_mortality,
            "eta_A" => &mut self.params.larval_maturation,
            "eta_m" => &mut self.params.mosquito_incubation,
            "nu_h" => &mut self.params.human_incubation,
            "m" => &mut self.params.mosquitoes_per_human,
            "k" => &mut self.params.larvae_per_human,
            "E_h0" => &mut self.exposed_humans,
            "I_h0" => &mut self.infected_humans,
            "R_h0" => &mut self.recovered_humans,
            "E_m0" => &mut self.exposed_mosquitoes,
            "I_m0" => &mut self.infected_mosquitoes,
            "S_h0" => self.susceptible_humans.insert(0.0),
            "A_m0" => self.aquatic_mosquitoes.insert(0.0),
            "S_m0" => self.susceptible_mosquitoes.insert(0.0),
            "horizon" => &mut self.horizon,
            "step" => &mut self.step,
            _ => return Err(ConfigError::UnknownKey { key: key.to_string() }),
        };
        *slot = value
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| ConfigError::InvalidNumber {
                key: key.to_string(),
                value: value.to_string(),
            })?;
        Ok(self)
    }

    /// Applies every assignment of a config file's text.
    pub fn apply_text(&mut self, text: &str) -> Result<&mut Self, ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Malformed {
                line: i + 1,
                text: raw.to_string(),
            })?;
            self.set(key.trim(), value)?;
        }
        Ok(self)
    }

    pub fn build(&self) -> Result<ScenarioConfig, ConfigError> {
        let p = self.params;
        p.validate()?;
        let n_h = p.human_population;
        let initial = StateVector {
            susceptible_humans: self
                .susceptible_humans
                .unwrap_or(n_h - self.exposed_humans - self.infected_humans - self.recovered_humans),
            exposed_humans: self.exposed_humans,
            infected_humans: self.infected_humans,
            recovered_humans: self.recovered_humans,
            aquatic_mosquitoes: self.aquatic_mosquitoes.unwrap_or(p.larval_capacity()),
            susceptible_mosquitoes: self.susceptible_mosquitoes.unwrap_or(p.mosquitoes_per_human * n_h),
            exposed_mosquitoes: self.exposed_mosquitoes,
            infected_mosquitoes: self.infected_mosquitoes,
        };
        for (key, value) in ["S_h0", "E_h0", "I_h0", "R_h0", "A_m0", "S_m0", "E_m0", "I_m0"]
            .into_iter()
            .zip(initial.to_array())
        {
            if value < 0.0 {
                return Err(ConfigError::Invariant(format!("{key} = {value} is negative")));
            }
        }
        let total = human_total(&initial);
        if (total - n_h).abs() > 1e-9 * n_h {
            return Err(ConfigError::Invariant(format!(
                "S_h0 + E_h0 + I_h0 + R_h0 = {total} differs from N_h = {n_h}"
            )));
        }
        if self.horizon.is_nan() || self.horizon <= 0.0 {
            return Err(ConfigError::Invariant(format!(
                "horizon = {} must be positive",
                self.horizon
            )));
        }
        if !(self.step > 0.0 && self.step <= self.horizon) {
            return Err(ConfigError::Invariant(format!(
                "step = {} must lie in (0, horizon = {}]",
                self.step, self.horizon
            )));
        }
        Ok(ScenarioConfig {
            params: p,
            initial,
            horizon: self.horizon,
            step: self.step,
            schedule: self.schedule.clone(),
        })
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        ScenarioBuilder::default().apply_text(text)?.build()
    }

    /// Serializes every key explicitly; [`ScenarioConfig::parse`] restores
    /// the same configuration.
    pub fn to_config_string(&self) -> String {
        let p = &self.params;
        let s = &self.initial;
        let numbers = [
            p.human_population,
            p.biting_rate,
            p.mosquito_to_human_transmission,
            p.human_to_mosquito_transmission,
            p.human_mortality,
            p.human_recovery,
            p.mosquito_mortality,
            p.egg_deposit_rate,
            p.larval_mortality,
            p.larval_maturation,
            p.mosquito_incubation,
            p.human_incubation,
            p.mosquitoes_per_human,
            p.larvae_per_human,
            s.susceptible_humans,
            s.exposed_humans,
            s.infected_humans,
            s.recovered_humans,
            s.aquatic_mosquitoes,
            s.susceptible_mosquitoes,
            s.exposed_mosquitoes,
            s.infected_mosquitoes,
            self.horizon,
            self.step,
        ];
        let mut out = String::from("# dengue scenario\n");
        for (key, value) in KEYS.iter().zip(numbers) {
            let _ = writeln!(out, "{key} = {value}");
        }
        let _ = writeln!(out, "schedule = {}", self.schedule);
        out
    }
}

/// Splits a `key=value` override.
pub fn parse_assignment(text: &str) -> Result<(String, String), ConfigError> {
    text.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| ConfigError::Malformed {
            line: 0,
            text: text.to_string(),
        })
}

/// Reads `path` (if any) over the defaults, then applies `overrides` in order.
pub fn load_config(path: Option<&Path>, overrides: &[(String, String)]) -> Result<ScenarioConfig, ConfigError> {
    let mut builder = ScenarioBuilder::default();
    if let Some(path) = path {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        builder.apply_text(&text)?;
    }
    for (key, value) in overrides {
        builder.set(key, value)?;
    }
    builder.build()
}
