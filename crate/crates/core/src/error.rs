use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite matrix entry")]
    NonFinite,

    #[error("operator is not Hermitian (asymmetry {asymmetry:.3e} relative to scale {scale:.3e})")]
    NotHermitian { asymmetry: f64, scale: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("reference Hamiltonian is not block-constant on the spectral projectors of H_S (residual {0:.3e})")]
    IncompatibleReference(f64),

    #[error("jump operators and reference split come from different decompositions")]
    MismatchedProvenance,

    #[error("unsupported bath for this solver: {0}")]
    UnsupportedBath(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("propagation diverged at step {step}")]
    PropagationDiverged { step: usize },

    #[error("time grids differ")]
    GridMismatch,

    #[error("basis is not orthonormal (residual {0:.3e})")]
    NonOrthonormalBasis(f64),

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
