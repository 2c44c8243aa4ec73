//! Command-line front end for `expgram`: matrix files, experiments and
//! coefficient/threshold checks.

pub mod args;
pub mod commands;
mod error;
pub mod experiment;
pub mod matrix_io;

pub use error::CliError;
