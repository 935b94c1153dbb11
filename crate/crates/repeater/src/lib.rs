//! Experiment engine and command-line front end for [`repeater_core`]:
//! config parsing, λ sweeps, repeater-count optimization, hardware heatmaps,
//! the analytic-versus-simulation validation matrix and CSV / JSON output.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod output;
pub mod validation;

pub use config::{ConfigError, Engine, ExperimentConfig};
pub use experiments::{
    run_distance_optimization, run_hardware_heatmap, run_lambda_sweep, run_one_shot, run_stream,
    ExperimentError,
};
pub use output::{SweepResult, SweepRow};
pub use validation::{run_validation, ValidationPlan, ValidationReport};
