use std::path::PathBuf;

use guided_mh::samplers::ChainFailure;

/// Errors from loading a config or running an experiment.
#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("invalid experiment: {0}")]
    Invalid(String),

    #[error(transparent)]
    Sampler(#[from] guided_mh::Error),

    #[error("{label}, replication {replication}: {failure}")]
    Chain {
        label: String,
        replication: usize,
        failure: Box<ChainFailure>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0}")]
    Output(String),
}

impl BenchError {
    /// Process exit code: 1 for problems with the config, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config { .. } | BenchError::Invalid(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type BenchResult<T> = Result<T, BenchError>;
