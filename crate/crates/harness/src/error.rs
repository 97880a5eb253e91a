use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}: {msg}")]
    Input { path: PathBuf, line: usize, msg: String },
    #[error("solver error: {0}")]
    Solver(#[from] robsub::Error),
    /// Some runs failed; their rows carry the error and the rest of the
    /// report was still written.
    #[error("{0} solver run(s) failed")]
    Failed(usize),
}

impl HarnessError {
    /// Process exit code: 2 for configuration and input problems, 3 for
    /// solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Solver(_) | HarnessError::Failed(_) => 3,
            _ => 2,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
        let path = path.into();
        move |source| HarnessError::Io { path, source }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
