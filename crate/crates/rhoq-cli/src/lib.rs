//! Command-line pipeline around `rhoq-core`: configuration, file IO, output
//! formats and deterministic parallel drivers.
//!
//! Every command is a pure function of (input files, resolved config, seed);
//! reruns produce byte-identical outputs and the worker count never changes a
//! byte, only wall time.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod parallel;

pub use config::{OutputFormat, RunConfig};
pub use error::{CliError, ExitCode};

/// Tool version embedded in every output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Tool name embedded in every output.
pub const TOOL: &str = "rhoq";
