use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] ising_rg_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    /// Process exit status for this error class. Status 1 is reserved for
    /// runs that complete but fail their own check.
    pub fn exit_code(&self) -> i32 {
        use ising_rg_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::Domain(_) | E::UnsupportedRegime(_)) => 2,
            CliError::Core(E::Resource(_)) => 3,
            CliError::Core(E::Numeric(_)) => 4,
            CliError::Io(_) | CliError::Output(_) => 5,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}
