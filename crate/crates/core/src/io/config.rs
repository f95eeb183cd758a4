use std::path::Path;

use crate::error::{Error, Result};
use crate::simulation::StudyConfig;

/// Overrides the default worker count when a study leaves `threads` unset.
pub const THREADS_ENV: &str = "MEDIATE_THREADS";

/// Reads a study configuration from TOML, or JSON when the file ends in
/// `.json`. Missing keys take their desk-scale defaults.
pub fn load_study_config(path: impl AsRef<Path>) -> Result<StudyConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let cfg = if is_json {
        parse_json_config(&text)?
    } else {
        parse_toml_config(&text)?
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_toml_config(text: &str) -> Result<StudyConfig> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

pub fn parse_json_config(text: &str) -> Result<StudyConfig> {
    serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

/// Worker count from the environment, if set to a positive integer.
pub fn env_threads() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}
