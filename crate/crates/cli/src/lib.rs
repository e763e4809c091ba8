//! Command-line driver for `drift-core`: configuration, a parallel segment
//! executor, and the report and trajectory files.

pub mod config;
pub mod exec;
pub mod output;
pub mod pipeline;

pub use config::{ConfigPatch, RunConfig};
pub use pipeline::{execute, plan, CliError, Outcome, Status};
