//! Dataset files, run outputs and the command implementations behind the
//! `pmn` binary.

pub mod commands;
pub mod dataset;
pub mod error;
pub mod output;

pub use error::{CliError, Result};
