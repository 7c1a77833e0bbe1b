use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("schedule is empty")]
    EmptySchedule,
    #[error("job {job} appears more than once in the permutation")]
    DuplicateJob { job: usize },
    #[error("job {job} is out of range for {jobs} jobs")]
    JobOutOfRange { job: usize, jobs: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("degenerate fit: {0}")]
    Degenerate(String),
    #[error("auxiliary task would be empty (n = {jobs}, ratio = {ratio}%)")]
    EatTooSmall { jobs: usize, ratio: u32 },
    #[error("auxiliary task would keep every job (n = {jobs}, ratio = {ratio}%)")]
    EatNotEconomical { jobs: usize, ratio: u32 },
    #[error("partial solution and remaining jobs do not partition the job set: {0}")]
    Partition(String),
    #[error("invalid priority order: {0}")]
    InvalidOrder(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("selection pool has {pool} individuals, need {needed}")]
    Underfull { pool: usize, needed: usize },
    #[error("no run records to aggregate")]
    EmptyAggregate,
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}
