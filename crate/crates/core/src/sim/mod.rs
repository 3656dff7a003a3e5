//! Scenario construction, the closed-loop simulation engine, and tracking
//! error statistics.

pub mod config;
pub mod engine;
pub mod ideal;
pub mod scenario;
pub mod stats;
pub mod trajectory;

pub use config::{
    ControllerKind, Estimator, Fidelity, QuantizationConfig, ScenarioConfig, Sensing,
    TrajectorySource,
};
pub use engine::{resolve_trajectory, run_simulation, Failure, Record, SimLog, CSV_HEADER};
pub use scenario::{generate_scenario, GeneratorKind, GeneratorParams};
pub use stats::{compute_stats, reduction_percent, resolve_window_start, walk_onset, ErrorStats};
pub use trajectory::{derive_human_commands, load_trajectory_csv, Trajectory, TrajectorySample};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("csv schema error at line {line}: {message}")]
    SchemaError { line: usize, message: String },
    #[error("time column must be strictly increasing (line {line})")]
    NonMonotoneTime { line: usize },
    #[error("bad generator parameters: {0}")]
    BadParams(String),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("statistics window starting at {window_start} s is empty (log ends at {end} s)")]
    EmptyWindow { window_start: f64, end: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
