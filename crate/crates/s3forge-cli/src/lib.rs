//! Command-line front end for the s3forge pipeline: configuration, command
//! orchestration and mesh/table exporters.

pub mod commands;
pub mod config;
pub mod export;

pub use commands::{run, CliError, Command};
pub use config::{resolve, Overrides, Settings};
