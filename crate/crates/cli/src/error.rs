use serde_json::json;
use thiserror::Error;

use crate::config::Violation;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("config has {} violation(s)", .0.len())]
    Invalid(Vec<Violation>),
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Runtime(_) => EXIT_RUNTIME,
            _ => EXIT_VALIDATION,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Read { .. } => "unreadable",
            CliError::Parse(_) => "unparsable",
            CliError::Invalid(_) => "invalid",
            CliError::UnknownScenario(_) => "unknown-scenario",
            CliError::Runtime(_) => "runtime",
        }
    }

    /// Machine-readable report printed to stderr.
    pub fn to_json(&self) -> String {
        let errors: Vec<Violation> = match self {
            CliError::Invalid(v) => v.clone(),
            other => vec![Violation {
                field: match other {
                    CliError::UnknownScenario(_) => "scenario".into(),
                    _ => String::new(),
                },
                message: other.to_string(),
            }],
        };
        serde_json::to_string_pretty(&json!({
            "status": "error",
            "kind": self.kind(),
            "exit_code": self.exit_code(),
            "errors": errors,
        }))
        .expect("error report serializes")
    }
}
