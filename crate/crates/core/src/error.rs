use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("singular point: {0}")]
    Singular(String),
    #[error("bodies {i} and {j} coincide")]
    CoincidentBodies { i: usize, j: usize },
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64, state: Vec<f64> },
    #[error("step limit reached at t = {t}")]
    TooManySteps { t: f64 },
    #[error("spherical chart singular (sin phi = {sin_phi:e})")]
    ChartSingularity { sin_phi: f64 },
    #[error("{what}: residual {residual:e} exceeds {limit:e}")]
    Consistency { what: String, residual: f64, limit: f64 },
    #[error("irregular point: {0}")]
    IrregularPoint(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("inconsistent data: {0}")]
    Inconsistent(String),
    #[error("frame undefined: {0}")]
    UndefinedFrame(String),
    #[error("curve is not closed (gap {gap:e})")]
    NotClosed { gap: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("region unbounded for h = {h}")]
    UnboundedRegion { h: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
