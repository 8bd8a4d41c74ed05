use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NonHermitian { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("imaginary residue {residue:e} in a quantity that must be real")]
    ImaginaryResidue { residue: f64 },

    #[error("Fock truncation n_max={n_max} is insufficient for alpha={alpha} (need n_max >= {required})")]
    TruncationInsufficient { n_max: usize, alpha: f64, required: usize },

    #[error("estimated working set {bytes} bytes exceeds the {limit} byte guard")]
    ResourceGuard { bytes: u128, limit: u128 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
