//! File formats, decode reports and the command-line front end for
//! [`hstream_core`].

pub mod cli;
mod error;
pub mod formats;
pub mod report;

pub use error::{CliError, Result};
