//! Command-line front end: configuration, state files and subcommands.

pub mod commands;
pub mod config;
pub mod state_file;
