use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Capacity(String),
    #[error("{0}")]
    Solver(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Capacity(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl From<mgchain::Error> for CliError {
    fn from(e: mgchain::Error) -> Self {
        match e {
            mgchain::Error::Domain(_) => CliError::Config(e.to_string()),
            mgchain::Error::Capacity(_) => CliError::Capacity(e.to_string()),
            mgchain::Error::Lookup { .. } | mgchain::Error::Convergence { .. } => CliError::Solver(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}
