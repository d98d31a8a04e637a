//! Experiment harness around `agm-core`: JSON configs, run directories and
//! the `agm` command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod runlog;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
