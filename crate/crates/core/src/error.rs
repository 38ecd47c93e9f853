use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the physics and analysis modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("resolvent evaluated at its pole z = {re} + {im}i")]
    DivideByZero { re: f64, im: f64 },
    #[error("separable form requires 2ω_b = ω_c, detuning is {detuning}")]
    NotSeparable { detuning: f64 },
    #[error("energy not conserved: in {input} vs out {output}")]
    ConservationViolation { input: f64, output: f64 },
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),
    #[error("intensity grid is identically zero")]
    ZeroGrid,
    #[error("intensity grid contains a negative or non-finite value at ({row}, {col})")]
    InvalidGridValue { row: usize, col: usize },
    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),
}

/// Errors from reading and writing grid files.
#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed file: {message}")]
    Format { path: PathBuf, message: String },
}
