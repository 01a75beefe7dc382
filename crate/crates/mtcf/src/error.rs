use thiserror::Error;

/// Errors produced by the correlation-function engines and their inputs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("operator dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("state vector norm is {norm}, expected 1")]
    NotNormalized { norm: f64 },

    #[error("operator entries must be finite")]
    NonFinite,

    #[error("operator basis has a singular Gram matrix")]
    SingularGram,

    #[error("Fourier coefficient C({index}) = {value} is negative; cannot define a real coupling")]
    NegativeFourierCoefficient { index: i64, value: f64 },

    #[error("coupling operator does not commute with the system Hamiltonian (norm {norm:.3e}); the commuting closure is not applicable")]
    NotCommuting { norm: f64 },

    #[error("correlation times must be non-increasing and non-negative")]
    BadTimeOrder,

    #[error("time grid must be non-empty, start at or after t, and increase strictly")]
    BadTimeGrid,

    #[error("step sizes must be positive and finite")]
    BadStep,

    #[error(
        "{overflowed} of {total} trajectories overflowed (> 0.1% tolerated); first offending \
         trajectory {first_trajectory} of master seed {seed}"
    )]
    TooManyOverflows {
        overflowed: u64,
        total: u64,
        first_trajectory: u64,
        seed: u64,
    },

    #[error("Fock space dimension {dim} exceeds the configured cap {cap}")]
    FockCapExceeded { dim: usize, cap: usize },

    #[error("the stochastic and Fock routes require an explicit-mode bath; discretize the correlation function first")]
    ModesRequired,

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("traces do not share the same (t, t') grid")]
    GridMismatch,

    #[error("malformed trace file at line {line}: {message}")]
    TraceParse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
