use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in `{parameter}`: {reason}")]
    Config { parameter: String, reason: String },

    #[error("cannot write `{path}`: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Physics(catforge_core::Error),
}

impl CliError {
    pub fn config(parameter: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Config {
            parameter: parameter.into(),
            reason: reason.into(),
        }
    }

    pub fn output(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Output {
            path: path.into(),
            source,
        }
    }

    /// 1 for configuration and output problems, 2 for physics precondition
    /// violations, 3 for truncation failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } | CliError::Output { .. } => 1,
            CliError::Physics(e) if e.is_truncation() => 3,
            CliError::Physics(_) => 2,
        }
    }
}

impl From<catforge_core::Error> for CliError {
    fn from(e: catforge_core::Error) -> Self {
        CliError::Physics(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
