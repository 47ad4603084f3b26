use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("matrix is singular: eigenvalue {eigenvalue:.3e} below threshold {threshold:.3e}")]
    Singular { eigenvalue: f64, threshold: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("covariance and information forms of the MSE update disagree by {deviation:.3e}")]
    FormMismatch { deviation: f64 },

    #[error("target observation matrix is orthogonal to range(G) (projection energy {energy:.3e})")]
    DegenerateProjection { energy: f64 },

    #[error("relaxed solution is numerically zero while the power budget is positive")]
    DegenerateSolution,

    #[error("SDP solver: {0}")]
    Solver(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
