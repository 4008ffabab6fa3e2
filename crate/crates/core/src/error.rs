//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("argument error: {0}")]
    Argument(String),
    #[error("grid error: {0}")]
    Grid(String),
    #[error("solver budget exceeded: sup norm {0:.4} > {1:.2}")]
    Budget(f64, f64),
    #[error("solver did not converge: last increment {last_increment:.3e} after {iterations} iterations")]
    SolverDiverged {
        last_increment: f64,
        iterations: usize,
    },
    #[error("consistency error: {0}")]
    Consistency(String),
    #[error("conditioning error: {0}")]
    Conditioning(String),
    #[error("inversion error: {0}")]
    Inversion(String),
    #[error("chart error: {0}")]
    Chart(String),
    #[error("classification error: {0}")]
    Classification(String),
    #[error("extension error at z = {re}+{im}i: {msg}")]
    Extension { re: f64, im: f64, msg: String },
    #[error("branch error: {0}")]
    Branch(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("contraction violation: {0}")]
    Contraction(String),
    #[error("monotonicity error: {0}")]
    Monotonicity(String),
    #[error("fixture error: {0}")]
    Fixture(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
