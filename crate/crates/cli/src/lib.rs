//! Experiment runner: data simulation, reconstruction, shift sweeps, method
//! comparison and basis diagnostics, driven by a JSON configuration.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use commands::{cmd_analyze_basis, cmd_compare, cmd_reconstruct, cmd_simulate, cmd_sweep_s};
pub use config::{ExperimentConfig, Method};
pub use error::{CliError, Result};
