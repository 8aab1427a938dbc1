use thiserror::Error;

/// Failures of a CLI command, each mapped to an exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unparseable or invalid input.
    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Usage(String),

    /// A computation failed; `check` names the stage that failed.
    #[error("numerical failure in {check}: {message}")]
    Numerical { check: String, message: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Numerical { .. } | CliError::Io { .. } => 3,
        }
    }

    pub fn numerical(check: &str, e: impl std::fmt::Display) -> Self {
        CliError::Numerical { check: check.to_string(), message: e.to_string() }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }
}
