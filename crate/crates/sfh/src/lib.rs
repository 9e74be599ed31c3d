//! Command-line front end for the `sfh-core` library: configuration,
//! data ingestion and report emission.

// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod build;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use cli::{run, Cli, Command};
pub use config::{load_config, parse_config_str, ConfigSources, LoadedConfig, RunConfig};
pub use error::{CliError, CliResult, EXIT_NUMERICAL, EXIT_VALIDATION};
