use std::path::PathBuf;

use cdt_core::dissection::DissectionError;
use cdt_core::env_model::{EnvError, GridError};
use cdt_core::planner::PlannerError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}: unsupported map format (expected .json, .pgm or .png)")]
    UnknownFormat(PathBuf),
    #[error("bad point {0:?}: expected \"x,y\"")]
    BadPoint(String),
    #[error("bad map spec {0:?}")]
    BadMapSpec(String),
    #[error("{0}")]
    Parse(String),
    #[error("free space is empty")]
    EmptyFreeSpace,
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::EmptyFreeSpace => 3,
            CliError::UnknownFormat(_) | CliError::BadPoint(_) | CliError::BadMapSpec(_) | CliError::Parse(_) => 2,
            CliError::Io { .. } | CliError::Planner(_) | CliError::Failed(_) => 1,
        }
    }
}

impl From<EnvError> for CliError {
    fn from(e: EnvError) -> Self {
        match e {
            EnvError::EmptyFreeSpace => CliError::EmptyFreeSpace,
            e => CliError::Parse(e.to_string()),
        }
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<DissectionError> for CliError {
    fn from(e: DissectionError) -> Self {
        match e {
            DissectionError::Env(e) => e.into(),
            e => CliError::Parse(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Parse(e.to_string())
    }
}
