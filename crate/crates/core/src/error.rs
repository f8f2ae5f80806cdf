use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid index {index} out of range for grid with n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("grid mismatch: expected n = {expected}, found n = {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("grid must have at least one interval")]
    EmptyGrid,

    #[error("expected {expected} samples, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("schema error at line {line}: {message}")]
    Schema { line: usize, message: String },

    #[error("spectrum indices must be dense from 0: expected k = {expected}, found k = {found}")]
    DenseIndex { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular step system at node {index}")]
    SingularStep { index: usize },

    #[error("no convergence for eigenvalue k = {k}: last iterate lambda = {last}, residual = {residual:e}")]
    NoConvergence {
        k: usize,
        last: Complex64,
        residual: f64,
    },

    #[error("suspected multiple eigenvalue near k = {k}: derivative {derivative:e} at lambda = {lambda}")]
    MultipleRoot {
        k: usize,
        lambda: Complex64,
        derivative: f64,
    },

    #[error("main equation failed at node {node}: residual {residual:e}")]
    MainEquation { node: usize, residual: f64 },

    #[error("unknown {kind} strategy '{name}' (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by malformed or inconsistent input data.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::IndexOutOfRange { .. }
                | Error::GridMismatch { .. }
                | Error::EmptyGrid
                | Error::LengthMismatch { .. }
                | Error::NonFinite { .. }
                | Error::Schema { .. }
                | Error::DenseIndex { .. }
                | Error::InvalidArgument(_)
                | Error::UnknownStrategy { .. }
                | Error::Io(_)
                | Error::Json(_)
        )
    }
}
