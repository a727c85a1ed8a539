//! Experiment runner for the `aperiodic` crate.
//!
//! A run reads an [`ExperimentConfig`], executes one [`Command`] and
//! commits its outputs (profile CSV, estimate JSON, check JSON, plot CSV)
//! to an output directory in one step.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, Command, Context, EstimateRecord, INEQUALITY_TOLERANCE};
pub use config::{ConfigError, ExperimentConfig, SCHEMA_VERSION};
pub use output::Artifacts;
