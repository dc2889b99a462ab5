use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("fit unavailable: {0}")]
    FitUnavailable(String),

    #[error("steady state not reached within {cap} steps")]
    SteadyStateNotReached { cap: u64 },

    #[error("step cap of {cap} exceeded before all tracked memes went extinct")]
    StepCapExceeded { cap: u64 },

    #[error("cell {cell} replica {replica}: {source}")]
    Cell {
        cell: usize,
        replica: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::FitUnavailable(_) => 3,
            Error::Cell { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
