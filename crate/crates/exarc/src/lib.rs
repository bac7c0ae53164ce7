//! Command-line front end, file formats and reports for [`exarc_core`].

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod manifest;
pub mod report;
pub mod surface;

pub use error::{CliError, CliResult};
pub use exarc_core as core;
