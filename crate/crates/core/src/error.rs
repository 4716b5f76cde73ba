use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid state ({row}, {col}): cell is a wall")]
    InvalidState { row: usize, col: usize },
    #[error("invalid state: {0}")]
    OutsideMap(String),
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("unknown task id `{0}`")]
    UnknownTask(String),
    #[error("line {line}: malformed coordinate `{token}`")]
    MalformedCoordinate { line: usize, token: String },
    #[error("no subtask entries found in planner response")]
    NoSubtasks,
    #[error("transport error after {attempts} attempt(s): {cause}")]
    Transport { attempts: u32, cause: String },
    #[error("authentication failed: {0}")]
    Authentication(String),
    #[error("planner returned an empty completion")]
    EmptyCompletion,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unmappable state in trajectory {trajectory} at index {index}: {state}")]
    Unmappable {
        trajectory: usize,
        index: usize,
        state: String,
    },
    #[error("inconsistent timesteps: expected t={expected}, found t={found}")]
    InconsistentTimesteps { expected: usize, found: usize },
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("training diverged: {0}")]
    Divergence(String),
    #[error("empty report: {0}")]
    EmptyReport(String),
    #[error("empty series")]
    EmptySeries,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
