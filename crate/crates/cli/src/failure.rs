use mfd_sim::coupling::CouplingError;
use std::path::{Path, PathBuf};

/// Every way a command can fail, each with its own exit code. Code 2 is
/// left to clap for usage errors.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Diverged(String),
    #[error("{0}")]
    NotConverged(String),
    #[error("{0}")]
    Probe(String),
    #[error("{0}")]
    Solver(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Io { .. } => 3,
            Failure::Parse { .. } => 4,
            Failure::Invalid(_) => 5,
            Failure::Diverged(_) => 6,
            Failure::NotConverged(_) => 7,
            Failure::Probe(_) => 8,
            Failure::Solver(_) => 9,
        }
    }

    /// Value of the summary's `status` field.
    pub fn status(&self) -> &'static str {
        match self {
            Failure::Io { .. } => "io_error",
            Failure::Parse { .. } => "parse_error",
            Failure::Invalid(_) => "invalid_input",
            Failure::Diverged(_) => "diverged",
            Failure::NotConverged(_) => "not_converged",
            Failure::Probe(_) => "probe_error",
            Failure::Solver(_) => "solver_error",
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Failure::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn parse(path: &Path, message: impl ToString) -> Self {
        Failure::Parse {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }
}

impl From<CouplingError> for Failure {
    fn from(e: CouplingError) -> Self {
        let message = e.to_string();
        match e {
            CouplingError::Config(_) | CouplingError::Network(_) | CouplingError::Decompose(_) => {
                Failure::Invalid(message)
            }
            CouplingError::Diverged { .. } => Failure::Diverged(message),
            CouplingError::Capped(_) | CouplingError::NotSteady { .. } => {
                Failure::NotConverged(message)
            }
            CouplingError::ProbeOutside(_) | CouplingError::ProbeMismatch(_) => {
                Failure::Probe(message)
            }
            CouplingError::Mna(_) | CouplingError::Lbm(_) => Failure::Solver(message),
        }
    }
}

pub fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

pub fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::io(path, e))
}
