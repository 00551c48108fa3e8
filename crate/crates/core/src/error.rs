use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building or measuring a configuration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("composite dimension {dim} exceeds the configured maximum {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("{0} contains a non-finite entry")]
    NonFinite(&'static str),

    #[error("matrix is not Hermitian: max |m - m^dagger| = {0:e}")]
    NotHermitian(f64),

    #[error("trace is not one: |Tr(m) - 1| = {0:e}")]
    NotUnitTrace(f64),

    #[error("matrix is not positive semidefinite: minimum eigenvalue {0:e}")]
    NotPsd(f64),

    #[error("{what} is not normalized: |norm - 1| = {deviation:e}")]
    NotNormalized { what: &'static str, deviation: f64 },

    #[error("interaction {index} is not unitary: max |U^dagger U - I| = {deviation:e}")]
    NotUnitary { index: usize, deviation: f64 },

    #[error("hermitian eigensolver did not converge")]
    EigenNonConvergence,

    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("{name} = {value} is outside its valid range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("{0}")]
    InvalidArgument(String),
}
