use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image error on {path}: {message}")]
    Image { path: PathBuf, message: String },

    #[error("line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    #[error("`{field}` = {value} is outside [{min}, {max}]")]
    OutOfRange {
        field: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("surface function must have 1..=10 components, got {0}")]
    ComponentCount(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown subset tag `{0}`")]
    UnknownTag(String),

    #[error("`{0}` is not a {1} tag")]
    WrongTagKind(String, &'static str),

    #[error("requested {requested} pairs but the pool only holds {available}")]
    PoolTooSmall { requested: usize, available: usize },

    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),

    #[error("metric undefined: ground truth has zero energy")]
    UndefinedMetric,

    #[error("relative improvement undefined: base mean is zero")]
    ZeroBase,

    #[error("no structure: image is empty or constant")]
    NoStructure,

    #[error("manifest: {0}")]
    Manifest(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
