//! Configuration, experiment commands and artifact output for the
//! `omnicell` command-line tool.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{cmd_cost, cmd_geometry, cmd_pattern, cmd_sumrate, CommandOutput};
pub use config::{Config, Overrides, SnrGrid};
pub use output::RunManifest;
