//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("profile supports overlap; smallest admissible shift is ell >= {min_ell}")]
    OverlappingSupports { min_ell: f64 },

    #[error("mollification radius {eps} destroys the plateau [1/{l}, {l}] (max admissible {max_eps})")]
    PlateauDestroyed { eps: f64, l: f64, max_eps: f64 },

    #[error("no decaying branch found for mu = {mu} in the height range [{s_min}, {s_max}]")]
    NoSolution { mu: f64, s_min: f64, s_max: f64 },

    #[error("solution rejected: {0}")]
    ConvergenceFailure(String),

    #[error("non-finite value: {what} at r = {r}")]
    NonFinite { what: String, r: f64 },

    #[error("flow step control: {0}")]
    FlowInternal(String),
}
