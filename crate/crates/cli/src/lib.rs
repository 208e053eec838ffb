//! Command implementations behind the `subembed` binary.

pub mod commands;
pub mod config;
pub mod synth;

pub use config::{PipelineConfig, UsageError};
