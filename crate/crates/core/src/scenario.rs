//! Scenario files bundle a network path, injections and a simulation config.
//!
//! ```toml
//! format = "myceliumsim/scenario/v1"
//! network = "net.txt"          # relative to the scenario file
//!
//! [config]
//! speed_mm_per_s = 0.5
//! rule = "annihilate"
//! coincidence_window_s = 1.0
//! refractory_s = 120.0
//! horizon_s = 600.0
//!
//! [[injection]]
//! node = 0
//! time_s = 0.0
//! amplitude_mv = 1.0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netfile::{self, FormatError};
use crate::network::MyceliumNetwork;
use crate::spike::{Injection, SimConfig};

pub const SCENARIO_FORMAT: &str = "myceliumsim/scenario/v1";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("scenario: {0}")]
    Parse(String),
    #[error("scenario network: {0}")]
    Network(#[from] FormatError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub format: String,
    pub network: PathBuf,
    #[serde(default)]
    pub config: SimConfig,
    #[serde(default, rename = "injection")]
    pub injections: Vec<Injection>,
}

impl Scenario {
    pub fn new(network: impl Into<PathBuf>, config: SimConfig, injections: Vec<Injection>) -> Self {
        Self {
            format: SCENARIO_FORMAT.to_string(),
            network: network.into(),
            config,
            injections,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        if s.format != SCENARIO_FORMAT {
            return Err(ScenarioError::Parse(format!(
                "expected format \"{SCENARIO_FORMAT}\", found \"{}\"",
                s.format
            )));
        }
        s.config
            .validate()
            .map_err(|e| ScenarioError::Parse(e.to_string()))?;
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }
}

/// A scenario together with its resolved network.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub network_path: PathBuf,
    pub network: MyceliumNetwork,
}

pub fn load_scenario(path: &Path) -> Result<LoadedScenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let scenario = Scenario::from_toml(&text)?;
    let network_path = if scenario.network.is_absolute() {
        scenario.network.clone()
    } else {
        path.parent().unwrap_or(Path::new(".")).join(&scenario.network)
    };
    let network = netfile::load_network(&network_path)?;
    Ok(LoadedScenario {
        scenario,
        network_path,
        network,
    })
}
