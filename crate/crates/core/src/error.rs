use std::path::PathBuf;

/// Errors raised while loading scenarios, evaluating models, or running solvers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed scenario: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("invalid {entity}: {reason}")]
    Validation { entity: String, reason: String },

    #[error("undefined geometry: {0}")]
    Geometry(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("battery underflow for UAV {uav}: needs {required:.3} J, holds {available:.3} J")]
    BatteryUnderflow {
        uav: usize,
        required: f64,
        available: f64,
    },

    #[error("battery overcharge for UAV {uav}: {level:.3} J exceeds capacity {capacity:.3} J")]
    Overcharge {
        uav: usize,
        level: f64,
        capacity: f64,
    },

    #[error("solver failure: {0}")]
    Solver(String),

    /// No decision satisfies the battery constraints.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(entity: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            entity: entity.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
