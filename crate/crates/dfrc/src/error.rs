//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the numerics, model, solver, and harness layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: asymmetry {asymmetry:.3e} exceeds tolerance {tolerance:.3e}")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("matrix is not positive definite: Cholesky failed at pivot {pivot}")]
    NotPositiveDefinite { pivot: usize },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:.3e} below -{tolerance:.3e}")]
    NotPositiveSemidefinite { eigenvalue: f64, tolerance: f64 },

    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("retraction hit a zero entry at ({row}, {col}); direction cannot be renormalized")]
    ZeroEntry { row: usize, col: usize },

    #[error("zero matrix cannot be retracted onto the sphere")]
    ZeroMatrix,

    #[error("entry ({row}, {col}) has modulus {modulus:.6e}, expected unit modulus")]
    NotUnitModulus { row: usize, col: usize, modulus: f64 },

    #[error("Frobenius norm {norm:.12e} does not match sphere radius {radius:.12e}")]
    WrongRadius { norm: f64, radius: f64 },

    #[error("empty or invalid angular region: {0}")]
    InvalidRegion(String),

    #[error("beam carries no mainlobe power (tr(F^H A_m F) = {power:.3e})")]
    ZeroMainlobePower { power: f64 },

    #[error("channel is rank-deficient: HH^H is not invertible")]
    RankDeficientChannel,

    #[error("normal matrix F_RF^H F_RF is singular even after regularization")]
    SingularNormalMatrix,

    #[error("consensus update degenerated: combination matrix is zero")]
    DegenerateUpdate,

    #[error("infeasible beamformer: {0}")]
    Infeasible(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("solver failed at iteration {iteration}: {source}")]
    Solver {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wraps an error with the outer-loop iteration at which it occurred.
    pub fn at_iteration(self, iteration: usize) -> Self {
        Error::Solver {
            iteration,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
