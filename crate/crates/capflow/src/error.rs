use thiserror::Error;

/// Errors surfaced by solvers and numeric kernels.
///
/// `InvalidInput` and `NotAdmissible` are configuration problems; the other
/// variants mean a numeric routine exhausted its budget without meeting its
/// tolerance.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("field is not admissible for the requested cap support: {0}")]
    NotAdmissible(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("series did not converge: {0}")]
    SeriesNonConvergence(String),

    #[error("solver did not converge: {0}")]
    SolveFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by bad configuration rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::InvalidInput(_) | Error::NotAdmissible(_))
    }
}
