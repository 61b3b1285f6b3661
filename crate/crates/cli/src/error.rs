use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] delayopt_core::Error),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    /// 2 for rejected input, 3 for solver failures, 4 for failed checks,
    /// 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use delayopt_core::Error as E;
        match self {
            CliError::Core(E::Domain { .. } | E::Precondition(_) | E::Config(_)) => 2,
            CliError::Core(E::Convergence { .. }) => 3,
            CliError::Core(E::MissingTrigger) => 1,
            CliError::Config(_) => 2,
            CliError::VerificationFailed(_) => 4,
            CliError::Io(_) | CliError::Output(_) => 1,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
