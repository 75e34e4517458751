use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystems(String),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("photon-number truncation exceeded: {total} > {n_max}")]
    Truncation { total: usize, n_max: usize },

    #[error("invalid optical scheme: {0}")]
    InvalidScheme(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("decomposition failed: {0}")]
    Decomposition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
