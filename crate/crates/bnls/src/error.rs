//! Error type shared across the toolkit.
//!
//! Numerical failure modes (non-convergence, divergence, inconclusive
//! bounds) are ordinary values of this enum rather than panics, because
//! sweep drivers must survive individual bad points and report them.

use thiserror::Error;

/// Anything that can go wrong while building grids, evaluating
/// functionals, solving, or doing I/O.
#[derive(Debug, Error)]
pub enum BnlsError {
    /// Grid construction rejected (sizes, guard bounds, box length).
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// A parameter outside its documented domain (mass, lambda, tau, ...).
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// Two fields that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// An operation that needs a nonzero field received one with zero mass.
    #[error("zero field: {0}")]
    ZeroField(String),

    /// The gradient flow hit its iteration cap without a certificate.
    #[error("flow did not converge: {iterations} iterations, el_residual = {el_residual:.3e}")]
    Unconverged { iterations: u64, el_residual: f64 },

    /// The flow's energy increased persistently; the step is too large.
    #[error("flow diverged (energy increasing); retry with dt = {suggested_dt}")]
    Diverged { suggested_dt: f64 },

    /// A dilation would push visible mass through the box boundary.
    #[error("dilation tail escape: boundary tail mass {tail_mass:.3e} exceeds 1e-10")]
    TailEscape { tail_mass: f64 },

    /// The competitor construction produced a nonnegative gap; the
    /// construction parameters need adjustment, the theory is not at fault.
    #[error("competitor bound inconclusive: gap = {gap:.6e} >= 0")]
    InconclusiveBound { gap: f64 },

    /// A bisection found no sign change over the probed range.
    #[error("no bracket: predicate constant over [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    /// Time integration produced a NaN or infinity.
    #[error("non-finite field at step {step}")]
    NonFinite { step: u64 },

    /// Snapshot or report parsing failed.
    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for BnlsError {
    fn from(e: serde_json::Error) -> Self {
        BnlsError::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, BnlsError>;
