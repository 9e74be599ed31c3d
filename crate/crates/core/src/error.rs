use alloc::string::String;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid convex body: {0}")]
    InvalidBody(String),
    #[error("convex body is not C2+: min(h + h'') = {margin:e}")]
    NotC2Plus { margin: f64 },
    #[error("zero vector has no Gauss preimage")]
    ZeroVector,
    #[error("point ({x}, {t}) lies outside the graph domain")]
    OutOfDomain { x: f64, t: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("graph is not area-stationary: p-oscillation {residual:e} exceeds {tolerance:e}")]
    NonStationary { residual: f64, tolerance: f64 },
    #[error("ruling inversion failed at x = {x}, eps = {eps}: {reason}")]
    Inversion { x: f64, eps: f64, reason: String },
    #[error("pole of the Codazzi solution at s = {s}")]
    Pole { s: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = core::result::Result<T, Error>;
