use thiserror::Error;

/// Errors raised by targets, kernels and the verification tools.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("point outside the support of the reference measure")]
    OutsideSupport,
    #[error("slice height {t} outside (0, {sup})")]
    HeightOutOfRange { t: f64, sup: f64 },
    #[error("no analytic level-set shape: {0}")]
    NoAnalyticShape(String),
    #[error("point is not inside the level set")]
    NotInside,
    #[error("level set is not convex")]
    NonConvex,
    #[error("chord search failed: {0}")]
    ChordFailure(String),
    #[error("{what} exceeded the iteration cap of {cap}")]
    IterationCap { what: &'static str, cap: usize },
    #[error("target is not integrable: {0}")]
    NonIntegrable(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("row renormalization correction {correction:e} exceeds 1e-8")]
    Renormalization { correction: f64 },
    #[error("reversibility residual {residual:e} exceeds tolerance")]
    Reversibility { residual: f64 },
    #[error("kernel and target are incompatible: {0}")]
    Mismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
