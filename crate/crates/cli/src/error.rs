use thiserror::Error;

/// Failure classes of a run, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    /// Classify a library error, prefixing the config field it came from.
    pub fn from_core(context: &str, err: pild::Error) -> Self {
        use pild::Error as E;
        let msg = if context.is_empty() {
            err.to_string()
        } else {
            format!("{context}: {err}")
        };
        match err {
            E::MemoryBudgetExceeded { .. } | E::PathBudgetExceeded { .. } => CliError::Resource(msg),
            E::NonFinite(_) | E::StepSizeUnderflow { .. } | E::QuadratureNonConvergence { .. } => {
                CliError::Numerical(msg)
            }
            _ => CliError::Validation(msg),
        }
    }

    pub fn io(what: &str, err: std::io::Error) -> Self {
        CliError::Resource(format!("{what}: {err}"))
    }
}
