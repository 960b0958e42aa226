//! Command-line front end for the `dampwave` library: configuration
//! parsing, experiment commands, and CSV/report output.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use cli::run_with;
pub use config::{parse_config, ConfigError, ExperimentConfig};
pub use error::CliError;
