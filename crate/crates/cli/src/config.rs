//! Scenario configuration: built-in defaults, overridden by an optional
//! flat key-value config file, overridden by command-line flags.

use armalloc_core::{
    OperatingTargets, PowerEvaluation, RatioGrid, Scenario, Stage, TrialParams,
    TwoStageFormulation,
};
use serde::Serialize;
use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Raw scenario settings before validation.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioConfig {
    pub stage: Stage,
    pub k: u32,
    pub r: f64,
    pub alpha: f64,
    pub power: f64,
    pub sigma: f64,
    pub delta: f64,
    pub delta0: f64,
    pub grid_start: f64,
    pub grid_end: f64,
    pub grid_step: f64,
    pub budget: f64,
    pub replicates: u64,
    pub seed: u64,
    pub evaluation: PowerEvaluation,
    pub formulation: TwoStageFormulation,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            stage: Stage::Single,
            k: 2,
            r: 1.0,
            alpha: 0.05,
            power: 0.9,
            sigma: 1.0,
            delta: 0.5,
            delta0: 0.125,
            grid_start: 1.0,
            grid_end: 5.0,
            grid_step: 0.1,
            budget: 0.03,
            replicates: 100_000,
            seed: 1,
            evaluation: PowerEvaluation::IdealizedRatio,
            formulation: TwoStageFormulation::Exact,
        }
    }
}

impl ScenarioConfig {
    /// Apply `key = value` pairs from a config file. Lines starting with
    /// `#` and blank lines are ignored.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError(format!(
                    "{}:{}: expected `key = value`, got `{line}`",
                    path.display(),
                    lineno + 1
                ))
            })?;
            self.set(key.trim(), value.trim()).map_err(|e| {
                ConfigError(format!("{}:{}: {}", path.display(), lineno + 1, e.0))
            })?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
            value
                .parse()
                .map_err(|_| ConfigError(format!("invalid value `{value}` for `{key}`")))
        }
        match key {
            "stage" => {
                self.stage = match value {
                    "single" => Stage::Single,
                    "two_stage" | "two-stage" => Stage::TwoStage,
                    other => {
                        return Err(ConfigError(format!(
                            "invalid stage `{other}` (expected single or two_stage)"
                        )))
                    }
                }
            }
            "k" => self.k = num(key, value)?,
            "r" => self.r = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "power" => self.power = num(key, value)?,
            "sigma" => self.sigma = num(key, value)?,
            "delta" => self.delta = num(key, value)?,
            "delta0" => self.delta0 = num(key, value)?,
            "grid_start" => self.grid_start = num(key, value)?,
            "grid_end" => self.grid_end = num(key, value)?,
            "grid_step" => self.grid_step = num(key, value)?,
            "budget" => self.budget = num(key, value)?,
            "replicates" => self.replicates = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "evaluation" => {
                self.evaluation = match value {
                    "idealized" => PowerEvaluation::IdealizedRatio,
                    "realized" => PowerEvaluation::RealizedRatio,
                    other => {
                        return Err(ConfigError(format!(
                            "invalid evaluation `{other}` (expected idealized or realized)"
                        )))
                    }
                }
            }
            "formulation" => {
                self.formulation = match value {
                    "exact" => TwoStageFormulation::Exact,
                    "approximate" => TwoStageFormulation::Approximate,
                    other => {
                        return Err(ConfigError(format!(
                            "invalid formulation `{other}` (expected exact or approximate)"
                        )))
                    }
                }
            }
            other => return Err(ConfigError(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    pub fn params(&self) -> armalloc_core::Result<TrialParams> {
        TrialParams::new(self.k, self.r, self.sigma, self.delta, self.delta0)
    }

    pub fn targets(&self) -> armalloc_core::Result<OperatingTargets> {
        OperatingTargets::new(self.alpha, self.power)
    }

    pub fn scenario(&self) -> armalloc_core::Result<Scenario> {
        Ok(Scenario {
            stage: self.stage,
            params: self.params()?,
            targets: self.targets()?,
            evaluation: self.evaluation,
            formulation: self.formulation,
        })
    }

    pub fn grid(&self) -> armalloc_core::Result<RatioGrid> {
        RatioGrid::new(self.grid_start, self.grid_end, self.grid_step)
    }
}
