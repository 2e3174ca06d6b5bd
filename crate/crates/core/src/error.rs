use thiserror::Error;

/// Errors raised anywhere in the simulation and decoding pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("calibration load error at `{path}`: {message}")]
    Load { path: String, message: String },

    #[error("mapping error: {0}")]
    Mapping(String),

    #[error("no chain of length {length} exists in the coupling graph")]
    Infeasible { length: usize },

    #[error("error-model gap: {0}")]
    Model(String),

    #[error("inconsistent decoder state: {0}")]
    Consistency(String),

    #[error("format error on line {line}: {message}")]
    Format { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn format(line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            line,
            message: message.into(),
        }
    }
}
