//! Command-line front end: configuration, reports and file emitters.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{CliError, Options, Outcome};
pub use config::{ConfigError, RunConfig};
