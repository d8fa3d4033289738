use std::fmt::Display;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config error at `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("experiment failed to run: {0}")]
    Run(String),
}

impl From<microlocal::error::Error> for CliError {
    fn from(e: microlocal::error::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

impl CliError {
    /// 2 for anything the user can fix in the invocation, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Schema { .. } => 2,
            CliError::Io(_) | CliError::Run(_) => 3,
        }
    }
}

/// One experiment invocation as written on disk (TOML).
///
/// ```toml
/// experiment = "fbi-isometry"
/// seed = 7
///
/// [params]
/// mixtures = 20
/// tolerance = 1e-6
/// ```
///
/// Every key under `params` is optional; missing keys take the experiment's
/// defaults, unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub params: toml::Table,
}

impl ExperimentConfig {
    /// All defaults for the given experiment.
    pub fn new(experiment: impl Into<String>) -> Self {
        Self {
            experiment: experiment.into(),
            seed: None,
            out: None,
            params: toml::Table::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = toml::Deserializer::new(text);
        serde_path_to_error::deserialize(de).map_err(|e| path_error("", e))
    }

    pub fn load(path: &Path) -> Result<(Self, String), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Ok((Self::parse(&text)?, text))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config tables always serialize")
    }
}

fn path_error<E: Display>(prefix: &str, e: serde_path_to_error::Error<E>) -> CliError {
    let path = e.path().to_string();
    let field = match (prefix.is_empty(), path == ".") {
        (true, _) => path,
        (false, true) => prefix.to_string(),
        (false, false) => format!("{prefix}.{path}"),
    };
    CliError::Schema {
        field,
        message: e.into_inner().to_string(),
    }
}

/// Decodes an experiment's `[params]` table; errors name the offending key.
pub fn decode_params<P: DeserializeOwned>(table: &toml::Table) -> Result<P, CliError> {
    let v = toml::Value::Table(table.clone());
    serde_path_to_error::deserialize(v).map_err(|e| path_error("params", e))
}
