//! Library half of the `rnls` tool: configuration, experiments and output.
//! The binary is a thin wrapper around [`cli::run`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
