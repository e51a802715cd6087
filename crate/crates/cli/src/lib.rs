//! Sweep orchestration and CSV export for the `mgchain` command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::{Command, RunConfig};
pub use error::CliError;
pub use output::{Label, Row, SweepResult};
