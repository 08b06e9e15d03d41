use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("kernel evaluated at a coincident point")]
    Singularity,

    #[error("well-stretched margin violated: min(1 + y_s) = {0:.3e}")]
    WellStretched(f64),

    #[error("self-intersection margin violated: beta1 = {0:.3e}")]
    SelfIntersection(f64),

    #[error("closure defect {0:.3e} exceeds the abort threshold")]
    ClosureDefect(f64),

    #[error("closure Newton iteration did not converge (defect {0:.3e})")]
    NonClosable(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed snapshot {path}: {msg}")]
    Snapshot { path: PathBuf, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for the errors that end a run early without being a setup mistake.
    pub fn is_abort(&self) -> bool {
        matches!(
            self,
            Error::WellStretched(_)
                | Error::SelfIntersection(_)
                | Error::ClosureDefect(_)
                | Error::NonFinite(_)
        )
    }
}
