//! File formats, run configuration and the subcommand implementations.

pub mod commands;
pub mod config;
pub mod formats;
