use std::fs;
use std::path::Path;

use repeater_core::{AttemptMode, ChainConfig, PairingMode, TimeModel};
use serde::de::DeserializeOwned;

use crate::error::{CliError, CliResult};

/// Parses a JSON document, naming the offending field on failure.
pub fn parse_json<T: DeserializeOwned>(path: &Path, text: &str) -> CliResult<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|err| {
        let field = err.path().to_string();
        let message = if field == "." {
            err.inner().to_string()
        } else {
            format!("field `{field}`: {}", err.inner())
        };
        CliError::Config {
            path: path.to_path_buf(),
            message,
        }
    })
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn load_config(path: &Path) -> CliResult<ChainConfig> {
    let config: ChainConfig = parse_json(path, &read_text(path)?)?;
    check_config(path, &config)?;
    Ok(config)
}

pub(crate) fn check_config(path: &Path, config: &ChainConfig) -> CliResult<()> {
    config.validate().map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        message: match e {
            repeater_core::SimError::Config(msg) => msg,
            other => other.to_string(),
        },
    })
}

/// Command-line settings that take precedence over config files.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub attempt_mode: Option<AttemptMode>,
    pub time_model: Option<TimeModel>,
    pub pairing_mode: Option<PairingMode>,
}

impl Overrides {
    pub fn apply(&self, config: &mut ChainConfig) {
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(mode) = self.attempt_mode {
            config.attempt_mode = mode;
        }
        if let Some(model) = self.time_model {
            config.time_model = model;
        }
        if let Some(pairing) = self.pairing_mode {
            config.pairing_mode = pairing;
        }
    }
}
