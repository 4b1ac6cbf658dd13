use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("linearization singular at index {index}: |u| = {value:e} below floor {floor:e}")]
    Singular { index: usize, value: f64, floor: f64 },

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    TrainingDiverged { epoch: usize, loss: f64 },

    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),

    #[error("config: field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("unknown recipe `{name}`; available: {available}")]
    UnknownRecipe { name: String, available: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable identifier, used by the CLI and the C API.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Shape(_) => "shape",
            Error::Domain(_) => "domain",
            Error::Degenerate(_) => "degenerate",
            Error::Singular { .. } => "singular",
            Error::TrainingDiverged { .. } => "diverged",
            Error::Checkpoint(_) => "checkpoint",
            Error::Config { .. } => "config",
            Error::UnknownRecipe { .. } => "unknown_recipe",
            Error::Io { .. } => "io",
        }
    }
}

/// Failures while reading a checkpoint file.
#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("unsupported checkpoint version {found} (expected {expected})")]
    VersionMismatch { found: String, expected: u32 },

    #[error("checkpoint truncated: missing section `{section}`")]
    Truncated { section: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("malformed checkpoint at line {line}: {message}")]
    Malformed { line: usize, message: String },
}
