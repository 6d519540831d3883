use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("radius below resolution: r = {r} is smaller than half the cell spacing h = {h}")]
    RadiusBelowResolution { r: f64, h: f64 },

    #[error("domain too small for radius: dilated cell ({0}, {1}) falls outside the lattice extents")]
    DomainTooSmallForRadius(i64, i64),

    #[error("cell ({0}, {1}) lies outside the lattice extents")]
    CellOutOfExtents(i64, i64),

    #[error("field undefined inside a window: cell ({0}, {1}) carries no value")]
    FieldUndefinedInWindow(i64, i64),

    #[error("non-finite value {value} at cell ({i}, {j})")]
    NonFiniteValue { i: i64, j: i64, value: f64 },

    #[error("coarea check requires finite-valued field: {found} distinct values exceeds the limit of {limit}")]
    TooManyLevels { found: usize, limit: usize },

    #[error("oracle instance too large: {0}")]
    OracleTooLarge(String),

    #[error("too few periods: support of {support} cells is shorter than 4k = {needed}")]
    TooFewPeriods { support: usize, needed: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), message: message.into() }
    }
}
