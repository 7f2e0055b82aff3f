//! Experiment runner for anisotropic bond percolation: config parsing,
//! experiment dispatch, CSV tables and SVG plots.

pub mod config;
pub mod experiments;
pub mod report;

pub use config::{parse_config, ConfigError, Experiment, ExperimentConfig};
pub use experiments::{run_experiment, write_outcome, Outcome, RunError};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const INVARIANT_VIOLATION: i32 = 1;
    /// Config, usage, model-argument and I/O errors.
    pub const CONFIG_ERROR: i32 = 2;
}
