use thiserror::Error;

/// Errors surfaced by the toolkit. Message strings for the named failure
/// modes are stable so callers (and the CLI) can match on them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cube finer than grid")]
    CubeFinerThanGrid,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("shape not positive")]
    ShapeNotPositive,

    #[error("Hardy integral diverges")]
    HardyIntegralDiverges,

    #[error("unbounded tail")]
    UnboundedTail,

    #[error("spectrum exceeds declared ball (tail fraction {0:.3e})")]
    SpectrumExceedsBall(f64),

    #[error("moment system ill-conditioned (estimate {0:.3e})")]
    IllConditioned(f64),

    #[error("range does not exhaust maximal function")]
    RangeDoesNotExhaust,

    #[error("extent too small")]
    ExtentTooSmall,

    #[error("exponent out of theorem range: {0}")]
    ExponentOutOfRange(String),

    #[error("hypothesis unmet: {0}")]
    HypothesisUnmet(String),

    #[error("atom {index} violates {condition}")]
    AtomInadmissible { index: usize, condition: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
