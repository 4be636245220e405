//! File formats, plotting and the command-line front end for `zeroloss-core`.

pub mod cli;
pub mod error;
pub mod io;
pub mod manifest;
pub mod runner;
pub mod svg;

pub use error::{CliError, Result};
