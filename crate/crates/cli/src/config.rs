//! Experiment definitions.
//!
//! ```json
//! {
//!   "simulation": {
//!     "n_agents": 100, "horizon": 150, "true_prob": 0.5, "seed": 7,
//!     "belief_init": "uniform_random", "lambda_init": 0.2,
//!     "learners_enabled": false
//!   },
//!   "analysis": { "discount_gamma": 0.96, "burn_in": 10, "svg": true }
//! }
//! ```
//!
//! `belief_init` is `uniform_random` (default) or `uniform_grid`;
//! `lambda_init` is a number or one number per agent (default 1).
//! The `analysis` block is optional. Unknown keys are rejected.

use std::path::Path;

use kelly_market::frequency::DEFAULT_BURN_IN;
use kelly_market::SimulationConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Discount factor for the `discounted_freq` column.
    #[serde(default = "default_gamma")]
    pub discount_gamma: f64,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    /// Also emit SVG charts.
    #[serde(default)]
    pub svg: bool,
}

fn default_gamma() -> f64 {
    0.96
}

fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            discount_gamma: default_gamma(),
            burn_in: default_burn_in(),
            svg: false,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let err = |message: String| CliError::Config {
            path: path.to_path_buf(),
            message,
        };
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| err(e.to_string()))?;
        config
            .simulation
            .validate()
            .map_err(|e| err(format!("field `simulation`: {e}")))?;
        let gamma = config.analysis.discount_gamma;
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(err(format!(
                "field `analysis.discount_gamma`: {gamma} is outside (0, 1]"
            )));
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::parse(path, &text)
    }
}
