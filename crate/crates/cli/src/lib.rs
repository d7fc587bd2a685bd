//! Configuration-driven experiment runner for heralded cat-state breeding.

pub mod config;
pub mod error;
pub mod manifest;
pub mod records;
pub mod reproduce;
pub mod scenario;
pub mod svg;

pub use config::{ExperimentConfig, Scenario};
pub use error::{CliError, CliResult};
