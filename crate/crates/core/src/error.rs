use thiserror::Error;

/// Errors raised by the numerical kernels and the orchestration layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("argument on branch cut: {0}")]
    Branch(String),
    #[error("special-function evaluation failed: {0}")]
    Evaluation(String),
    #[error("imaginary residue {residue:e} exceeds tolerance {tolerance:e} in {what}")]
    ImaginaryResidue {
        what: String,
        residue: f64,
        tolerance: f64,
    },
    #[error("quadrature did not converge: {0}")]
    Convergence(String),
    #[error("grid error: {0}")]
    Grid(String),
    #[error("grid does not resolve the kernel oscillation: {0}")]
    Resolution(String),
    #[error("covariance matrix outside the symmetric family: {0}")]
    Shape(String),
    #[error("covariance matrix is not mode-symmetric: {0}")]
    Asymmetry(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("invalid threshold: {0}")]
    Threshold(String),
}

pub type Result<T> = std::result::Result<T, Error>;
