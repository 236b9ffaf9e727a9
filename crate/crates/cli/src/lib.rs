//! Pipeline commands behind the `factcheck` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod features;
pub mod io;

pub use config::{Backend, Overrides, PipelineConfig, Task};
pub use error::{CliError, CliResult, ErrorKind};
