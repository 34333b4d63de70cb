use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the link prediction library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("node id out of range in edge ({u}, {v}) for a graph of {n} nodes")]
    NodeOutOfRange { u: usize, v: usize, n: usize },

    #[error("invalid node id {node} (graph has {n} nodes)")]
    InvalidNode { node: usize, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("katz damping {beta} is not below 1/lambda_1 = {bound} (lambda_1 estimated as {lambda})")]
    KatzDivergent { beta: f64, bound: f64, lambda: f64 },

    #[error("no eligible query nodes: every node lacks a two-hop non-neighbor")]
    NoEligibleQueries,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("malformed artifact: {0}")]
    Artifact(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
