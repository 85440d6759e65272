use thiserror::Error;

/// Errors surfaced by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("ladder base too small: M(R) <= R at R = {0}")]
    LadderBase(f64),

    #[error("no escape radius found on the dyadic grid up to 2^20")]
    EscapeRadiusNotFound,

    #[error("consistency failure: {0}")]
    Consistency(String),

    #[error("no (nu', eps0) pair on the supplied grids passed the sampled inequality")]
    ConstantsNotFound,

    #[error("degenerate grid: every pixel carries the same classification")]
    DegenerateGrid,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("malformed data: {0}")]
    Malformed(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
