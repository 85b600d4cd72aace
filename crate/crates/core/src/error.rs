use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid gauge: {0}")]
    InvalidGauge(String),

    #[error("{what}: no finite exponent fits on the grid ({detail})")]
    NoExponent { what: &'static str, detail: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("radius schedule: {0}")]
    Schedule(String),

    #[error("branching: {0}")]
    Branching(String),

    #[error("disc count {count} exceeds cap {cap}")]
    DiscCap { count: u128, cap: u128 },

    #[error("monte carlo: {0}")]
    MonteCarlo(String),

    #[error("quadrature: {0}")]
    Quadrature(String),

    #[error("config error at `{path}`: {message}")]
    ConfigParse { path: String, message: String },

    #[error("config validation failed: {}", .0.join("; "))]
    ConfigInvalid(Vec<String>),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
