use std::fs;
use std::path::Path;

use thiserror::Error;

use super::{validate_fleet, FleetSpec, Violation};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}:{line}:{column}: at `{field}`: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        field: String,
        message: String,
    },
    #[error("invalid fleet configuration:\n  {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\n  "))]
    Invalid(Vec<Violation>),
}

/// Parses a fleet document, applies defaults and checks every invariant.
///
/// `origin` names the source in error messages.
pub fn fleet_from_json(text: &str, origin: &str) -> Result<FleetSpec, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut spec: FleetSpec = serde_path_to_error::deserialize(de).map_err(|err| {
        let field = err.path().to_string();
        let inner = err.into_inner();
        ConfigError::Parse {
            origin: origin.to_string(),
            line: inner.line(),
            column: inner.column(),
            field,
            message: inner.to_string(),
        }
    })?;
    spec.apply_defaults();
    let violations = validate_fleet(&spec);
    if violations.is_empty() {
        Ok(spec)
    } else {
        Err(ConfigError::Invalid(violations))
    }
}

/// Reads and validates a fleet configuration file.
pub fn load_fleet(path: impl AsRef<Path>) -> Result<FleetSpec, ConfigError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    fleet_from_json(&text, &path.display().to_string())
}

pub fn fleet_to_json(spec: &FleetSpec) -> String {
    serde_json::to_string_pretty(spec).expect("fleet specs always serialize")
}

pub fn save_fleet(spec: &FleetSpec, path: impl AsRef<Path>) -> Result<(), ConfigError> {
    let path = path.as_ref();
    fs::write(path, fleet_to_json(spec) + "\n").map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })
}
