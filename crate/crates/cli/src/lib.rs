//! Command-line front end for the `kgframe` library: JSON file formats,
//! report envelopes and subcommand dispatch.

pub mod commands;
pub mod error;
pub mod files;
pub mod report;

pub use commands::{run, Cli};
pub use error::{CliError, EXIT_INPUT, EXIT_MATH, EXIT_OK};
