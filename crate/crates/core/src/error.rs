use thiserror::Error;

/// Errors raised by the library. Bound violations are never errors; they are
/// recorded as ledger rows with a negative margin.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("sphere of radius {radius} is empty (largest attained distance {max_distance})")]
    EmptySphere { radius: f64, max_distance: f64 },

    #[error("sphere of radius {radius} with band {band} reaches the mesh boundary (boundary at distance {boundary_distance})")]
    Boundary { radius: f64, band: f64, boundary_distance: f64 },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
