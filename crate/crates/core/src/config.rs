//! TOML game configuration.
//!
//! ```toml
//! state = "werner:0.1"
//! payoffs = "explicit"          # standard | biased | explicit
//! # (alpha, beta, sigma, sigma') with a/b and up first; each entry is [U_A, U_B]
//! entries = [[1, 0], [0, 1], ...]
//! priors = [[0.25, 0.25], [0.25, 0.25]]
//! label = "my game"
//! ```

use serde::Deserialize;
use thiserror::Error;

use crate::game::{biased_payoffs, standard_payoffs, GameError, GameInstance, PayoffTensor, Priors};
use crate::states::{StateError, StateSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unknown payoff table `{0}` (expected standard, biased or explicit)")]
    UnknownPayoffs(String),
    #[error("explicit payoffs need exactly 16 [U_A, U_B] entries, got {0}")]
    EntryCount(usize),
    #[error("`entries` given but payoffs = `{0}`")]
    UnexpectedEntries(String),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Game(#[from] GameError),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    pub state: String,
    #[serde(default = "default_payoffs")]
    pub payoffs: String,
    pub entries: Option<Vec<[f64; 2]>>,
    pub priors: Option<[[f64; 2]; 2]>,
    pub label: Option<String>,
}

fn default_payoffs() -> String {
    "standard".into()
}

/// `standard` or `biased`.
pub fn named_payoffs(name: &str) -> Result<PayoffTensor, ConfigError> {
    match name.trim().to_ascii_lowercase().as_str() {
        "standard" => Ok(standard_payoffs()),
        "biased" => Ok(biased_payoffs()),
        other => Err(ConfigError::UnknownPayoffs(other.to_string())),
    }
}

impl GameConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn payoff_tensor(&self) -> Result<PayoffTensor, ConfigError> {
        match (self.payoffs.trim().to_ascii_lowercase().as_str(), &self.entries) {
            ("explicit", Some(entries)) => {
                let pairs: [(f64, f64); 16] = entries
                    .iter()
                    .map(|e| (e[0], e[1]))
                    .collect::<Vec<_>>()
                    .try_into()
                    .map_err(|_| ConfigError::EntryCount(entries.len()))?;
                Ok(PayoffTensor::from_pairs(&pairs)?)
            }
            ("explicit", None) => Err(ConfigError::EntryCount(0)),
            (name, None) => named_payoffs(name),
            (name, Some(_)) => Err(ConfigError::UnexpectedEntries(name.to_string())),
        }
    }

    pub fn state_spec(&self) -> Result<StateSpec, ConfigError> {
        Ok(StateSpec::parse(&self.state)?)
    }

    pub fn build(&self) -> Result<GameInstance, ConfigError> {
        let spec = self.state_spec()?;
        let state = spec.build()?;
        let priors = match self.priors {
            Some(p) => Priors::new(p)?,
            None => Priors::uniform(),
        };
        let label = self
            .label
            .clone()
            .unwrap_or_else(|| format!("{} {}", self.state.trim(), self.payoffs.trim()));
        Ok(GameInstance::new(self.payoff_tensor()?, priors, state.rho)?.with_label(label))
    }
}
