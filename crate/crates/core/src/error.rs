use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error)]
pub enum Error {
    /// A dataset schema is internally inconsistent or references unknown columns.
    #[error("schema error: {0}")]
    Schema(String),

    /// A source file or table failed validation while loading.
    #[error("load error: {0}")]
    Load(String),

    /// A preprocessing step was asked to do something its input does not support.
    #[error("preprocess error: {0}")]
    Preprocess(String),

    /// Training could not proceed (degenerate labels, shape mismatch, bad input).
    #[error("train error: {0}")]
    Train(String),

    /// Prediction input does not match the fitted model.
    #[error("predict error: {0}")]
    Predict(String),

    /// Invalid input to a metric or analysis computation.
    #[error("analysis error: {0}")]
    Analysis(String),

    /// A serialized artifact could not be parsed.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
