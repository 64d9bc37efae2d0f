use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Pauli letter {0:?}")]
    InvalidPauliLetter(char),

    #[error("qubit count mismatch: expected {expected}, found {found}")]
    QubitMismatch { expected: usize, found: usize },

    #[error("{n} qubits exceeds the configured limit of {max}")]
    TooManyQubits { n: usize, max: usize },

    #[error("spectral norm {norm} exceeds the bound 1")]
    NormExceeded { norm: f64 },

    #[error("coefficient of {pauli} is not real: {value}")]
    NonRealCoefficient { pauli: String, value: Complex64 },

    #[error("coefficient of {pauli} is not finite")]
    NonFiniteCoefficient { pauli: String },

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("unsupported norm exponent p = {0}; p must be at least 1")]
    UnsupportedNorm(f64),

    #[error("invalid test parameters: {0}")]
    InvalidSpec(String),

    #[error("oracle capability `{0}` is not enabled")]
    Capability(&'static str),

    #[error("invalid query duration {0}; durations must be positive and finite")]
    InvalidDuration(f64),

    #[error("state norm deviates from 1 by {0:e}")]
    NotNormalized(f64),

    #[error("circuit-mode amplitude estimation is limited to {max} qubits, got {n}")]
    CircuitTooLarge { n: usize, max: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
