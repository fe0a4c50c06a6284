use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("slope ratio {rho} outside the open image interval ({lo}, {hi})")]
    RatioOutOfImage { rho: f64, lo: f64, hi: f64 },

    #[error("linear curves have a constant slope ratio and cannot be inverted")]
    LinearCurveNotInvertible,

    #[error("operation requires a strictly concave curve, got a linear one")]
    NonConcaveCurve,

    #[error("expected a positive integer, got {0}")]
    NonPositive(i64),

    #[error("linear curves are rejected here; use the linear synthesizer")]
    LinearCurveRejected,

    #[error("invalid weight scheme: {0}")]
    InvalidScheme(String),

    #[error("gamma must lie in [0, 1), got {0}")]
    GammaOutOfRange(f64),

    #[error("scheme/curve incompatibility: {0}")]
    SchemeCurveIncompatible(String),

    #[error("rho must lie in [0, 1], got {0}")]
    RhoOutOfRange(f64),

    #[error("estimation window invalid: {0}")]
    BadWindow(String),

    #[error("sigma grid too narrow: {0}")]
    GridTooNarrow(String),

    #[error("bad wavelet table grid: {0}")]
    BadGrid(String),

    #[error("bad descriptor: {0}")]
    BadDescriptor(String),

    #[error("bad coefficient file: {0}")]
    ParseField(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
