//! File formats, a rayon executor and the command-line front end for
//! [`avrs_core`].

pub mod commands;
pub mod files;
pub mod output;
pub mod parallel;

pub use commands::{execute, Cli, CliError};
