use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("polynomial degree {0} is too low for this operation")]
    DegreeTooLow(usize),

    #[error("non-physical state in cell {cell}: {detail}")]
    State { cell: usize, detail: String },

    #[error("non-physical state: {0}")]
    NegativePressure(String),

    #[error("fields live on different meshes or layouts: {0}")]
    MeshMismatch(String),

    #[error("invalid time step: {0}")]
    InvalidStep(String),

    #[error("wave speed vanishes everywhere; cannot pick a time step")]
    DegenerateDynamics,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("riemann solver did not converge after {0} iterations")]
    RiemannNoConvergence(usize),

    #[error("query outside tabulated range: {0}")]
    Range(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach a cell index to a state error raised without one.
    pub(crate) fn in_cell(self, cell: usize) -> Self {
        match self {
            Error::NegativePressure(detail) => Error::State { cell, detail },
            other => other,
        }
    }

    /// True for errors that come from the solver state rather than the setup.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::State { .. }
                | Error::NegativePressure(_)
                | Error::DegenerateDynamics
                | Error::RiemannNoConvergence(_)
        )
    }
}
