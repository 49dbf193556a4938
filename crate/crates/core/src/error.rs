use thiserror::Error;

/// Errors raised by the numerics library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (deviation {deviation:.3e} exceeds {tolerance:.3e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("function undefined at eigenvalue {eigenvalue:.6e}")]
    Domain { eigenvalue: f64 },

    #[error("invalid density operator: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("steady state is not unique: {count} eigenvalues with |Re| below {threshold:.3e}")]
    AmbiguousSteadyState { count: usize, threshold: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("steady state is rank deficient (min eigenvalue {min_eigenvalue:.3e}); use the commutator form instead")]
    RankDeficient { min_eigenvalue: f64 },

    #[error("response has imaginary residue {residue:.3e} at tau = {tau:.6} (max |value| {scale:.3e})")]
    ImaginaryResidue { residue: f64, tau: f64, scale: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
