use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Which alternating-optimization stage produced a failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Trajectory,
    Beamforming,
    Power,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Stage::Trajectory => "trajectory",
            Stage::Beamforming => "beamforming",
            Stage::Power => "power",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario field `{field}`: {reason}")]
    InvalidScenario { field: String, reason: String },

    #[error("invalid input: {0}")]
    InvalidSweep(String),

    #[error("failed to read config {path}: {source}")]
    ConfigRead {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse config {path}: {message}")]
    ConfigParse { path: PathBuf, message: String },

    #[error("conic solve failed ({status}): {message}")]
    Solver { status: String, message: String },

    #[error("{stage} stage failed at iteration {iteration}{}: {source}", slot.map(|s| format!(", slot {s}")).unwrap_or_default())]
    Stage {
        stage: Stage,
        iteration: usize,
        slot: Option<usize>,
        #[source]
        source: Box<Error>,
    },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidScenario {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn at_stage(self, stage: Stage, iteration: usize) -> Self {
        Error::Stage {
            stage,
            iteration,
            slot: None,
            source: Box::new(self),
        }
    }

    /// True for failures raised while validating inputs rather than while solving.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidScenario { .. }
                | Error::InvalidSweep(_)
                | Error::ConfigRead { .. }
                | Error::ConfigParse { .. }
        )
    }
}
