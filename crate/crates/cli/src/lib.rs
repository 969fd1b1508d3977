//! Pipeline driver behind the `cutleak` binary.

pub mod align;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod telemetry;

pub use config::{RunConfig, Slicing, SweepConfig};
pub use error::{exit, CliError};
