use tailorder::TailError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Core(#[from] TailError),
}

impl CliError {
    /// 1 verification failure, 2 usage, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Verification(_) => 1,
            Self::Usage(_) => 2,
            Self::Io(_) => 3,
            Self::Core(TailError::Domain(_) | TailError::Unsupported(_) | TailError::CombinatorialBudget { .. }) => 2,
            Self::Core(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
