//! File formats and subcommands behind the `polypass` binary.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{random_directions, run_command, CliError};
pub use config::RunConfig;
