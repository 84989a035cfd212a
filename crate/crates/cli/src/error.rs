use thiserror::Error;

/// Exit code for configuration, usage and input errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for numerical failures such as a diverging path.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("input: {0}")]
    Input(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] svlab_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use svlab_core::Error as E;
        match self {
            CliError::Core(E::NonFiniteState { .. } | E::GridTooCoarse { .. } | E::NonFiniteStart) => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
