use ddtruss::{ChebyshevError, DatasetError, KernelError, SolverError, TrussError};
use thiserror::Error;

/// Failures mapped onto the process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Truss(#[from] TrussError),
    #[error(transparent)]
    Chebyshev(#[from] ChebyshevError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("{0}")]
    Coverage(String),
    #[error("{0}")]
    NotConverged(String),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Coverage(_) => 3,
            CliError::Truss(TrussError::StrainOutOfDomain { .. }) => 3,
            CliError::NotConverged(_) => 4,
            _ => 2,
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Truss(t) => CliError::Truss(t),
            SolverError::InvalidSettings(_) | SolverError::InvalidLambdas => CliError::Usage(e.to_string()),
            SolverError::SingularTangent { .. } | SolverError::NonFiniteResidual { .. } => {
                CliError::NotConverged(e.to_string())
            }
        }
    }
}
