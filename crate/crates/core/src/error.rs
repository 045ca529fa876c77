use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: malformed JSON: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("line {line}: missing field `{field}`")]
    MissingField { line: usize, field: &'static str },

    #[error("line {line}: invalid value for field `{field}`: {message}")]
    InvalidField {
        line: usize,
        field: &'static str,
        message: String,
    },

    #[error("line {line}: expected a header object with key `{key}`")]
    MissingHeader { line: usize, key: &'static str },

    #[error("dummy id `{0}` collides with a real node")]
    DummyCollision(String),

    #[error("dummy mode `none` cannot be attached")]
    NoDummyMode,

    #[error("ground truth list is empty")]
    EmptyTruth,

    #[error("rank correlation needs at least 2 common papers, found {0}")]
    TooFewCommon(usize),

    #[error("rank correlation is undefined for a constant ranking")]
    ConstantRanking,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown {kind} `{name}`, expected one of: {expected}")]
    UnknownName {
        kind: &'static str,
        name: String,
        expected: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
