use std::path::PathBuf;

use thiserror::Error;

use cep_core::{BuildError, PatternError, RuntimeError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid stream spec: {0}")]
    Spec(String),
    #[error("invalid rates: {0}")]
    Rates(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("input line {line}: {msg}")]
    Csv { line: u64, msg: String },
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error(transparent)]
    Difftest(#[from] cep_core::difftest::DiffError),
}

impl BenchError {
    /// Process exit code: 2 for usage and build problems, 3 for bad data.
    pub fn exit_code(&self) -> u8 {
        match self {
            BenchError::Csv { .. } | BenchError::Runtime(_) => 3,
            _ => 2,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> BenchError {
        let path = path.into();
        move |source| BenchError::Io { path, source }
    }
}
