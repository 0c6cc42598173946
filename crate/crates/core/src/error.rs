use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("statistic undefined: {0}")]
    UndefinedStatistic(String),

    #[error("statistics unavailable: {0}")]
    StatisticsUnavailable(String),

    #[error("config {path}: line {line}: {msg}")]
    ConfigLine { path: PathBuf, line: usize, msg: String },

    #[error("config {path}: {msg}")]
    Config { path: PathBuf, msg: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { context: context.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
