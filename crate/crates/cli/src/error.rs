use coherent_qkd::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    /// Output was produced but at least one matched pair disagreed.
    #[error("{0}")]
    Statistical(String),

    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Statistical(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let usage = |e: &CoreError| {
            matches!(
                e,
                CoreError::Domain { .. }
                    | CoreError::Infeasible { .. }
                    | CoreError::Config(_)
                    | CoreError::StrategyRejected { .. }
            )
        };
        let bad_input = match &e {
            CoreError::Pulse { source, .. } => usage(source),
            other => usage(other),
        };
        if bad_input {
            CliError::Usage(e.to_string())
        } else {
            CliError::Internal(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(format!("i/o: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Internal(format!("csv: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
