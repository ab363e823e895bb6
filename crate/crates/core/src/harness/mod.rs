//! Datasets, experiment configuration, replay of the online protocol,
//! metrics, trace files and the command-line front end.

use thiserror::Error;

pub mod cli;
pub mod config;
pub mod dataset;
pub mod optimum;
pub mod runner;
pub mod synthetic;
pub mod trace;

pub use config::{ExperimentConfig, Horizon, ScheduleKind, SetConfig, Task, OUTPUT_DIR_ENV};
pub use dataset::{
    parse_libsvm, parse_libsvm_str, parse_returns_csv, parse_returns_str, to_libsvm_string, write_libsvm, write_returns_csv, DataError,
    Dataset,
};
pub use optimum::{cyclic_weights, offline_optimum, offline_optimum_weighted, Optimum};
pub use runner::{fill_regret, format_percent, load_dataset, run_experiment, running_metrics, IterationRecord, Prepared, TrialResult};
pub use trace::{write_comparison, write_comparison_to, write_trace, write_trace_to, TRACE_HEADER};

use crate::geometry::GeometryError;
use crate::learners::LearnerError;
use crate::losses::LossError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(#[from] DataError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },
    #[error("offline solver did not converge after {iterations} iterations (gap {gap:e})")]
    NotConverged { iterations: usize, gap: f64 },
}

impl HarnessError {
    /// Process exit code: 2 for configuration errors, 3 for data errors,
    /// 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Data(_) => 3,
            _ => 1,
        }
    }
}
