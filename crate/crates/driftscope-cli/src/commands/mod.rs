//! Subcommand implementations. Each returns the written report so tests can
//! assert on it directly.

pub mod attributes;
pub mod eval;
pub mod influence;
pub mod prototypes;

use crate::config::ValidationError;
use driftscope_core::attribute::AttributeError;
use driftscope_core::dataset::DatasetError;
use driftscope_core::eval::EvalError;
use driftscope_core::influence::InfluenceError;
use driftscope_core::prototype::PrototypeError;
use driftscope_core::rashomon::RashomonError;
use std::path::Path;

/// Failure classes mapped onto exit codes: validation → 1, computation → 2,
/// provider → 3.
#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("computation error: {0}")]
    Computation(String),
    #[error("provider error: {0}")]
    Provider(String),
}

impl CommandError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CommandError::Validation(_) => 1,
            CommandError::Computation(_) => 2,
            CommandError::Provider(_) => 3,
        }
    }
}

impl From<ValidationError> for CommandError {
    fn from(e: ValidationError) -> Self {
        CommandError::Validation(e.0)
    }
}

impl From<DatasetError> for CommandError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io { .. } | DatasetError::MissingColumn(_) => {
                CommandError::Validation(e.to_string())
            }
            other => CommandError::Computation(other.to_string()),
        }
    }
}

impl From<PrototypeError> for CommandError {
    fn from(e: PrototypeError) -> Self {
        CommandError::Computation(e.to_string())
    }
}

impl From<RashomonError> for CommandError {
    fn from(e: RashomonError) -> Self {
        CommandError::Computation(e.to_string())
    }
}

impl From<InfluenceError> for CommandError {
    fn from(e: InfluenceError) -> Self {
        CommandError::Computation(e.to_string())
    }
}

impl From<EvalError> for CommandError {
    fn from(e: EvalError) -> Self {
        CommandError::Computation(e.to_string())
    }
}

impl From<AttributeError> for CommandError {
    fn from(e: AttributeError) -> Self {
        match e {
            AttributeError::ProviderFailure { .. } => CommandError::Provider(e.to_string()),
            AttributeError::Io { .. } | AttributeError::Csv(_) => {
                CommandError::Validation(e.to_string())
            }
            other => CommandError::Computation(other.to_string()),
        }
    }
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CommandError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CommandError::Computation(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CommandError::Computation(format!("cannot write {}: {e}", path.display())))
}

/// Writes report.json, report.md, and the resolved config echo.
pub fn write_report(
    dir: &Path,
    report: &crate::report::ExplanationReport,
) -> Result<(), CommandError> {
    write_file(dir, "report.json", &report.to_json_string())?;
    write_file(dir, "report.md", &crate::report::render_markdown(report))?;
    let mut config = serde_json::to_string_pretty(&report.config).expect("config serializes");
    config.push('\n');
    write_file(dir, "config.resolved.json", &config)
}
