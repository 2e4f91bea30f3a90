//! Staged benchmark pipeline around `fairbench-core`: dataset registry,
//! configuration, on-disk artifacts, the cell runner, and the three
//! pipeline stages (preprocess, benchmark, analyze).

pub mod algorithms;
pub mod config;
pub mod error;
pub mod persist;
pub mod registry;
pub mod runner;
pub mod stages;

pub use algorithms::Algorithm;
pub use config::{Config, Objective};
pub use error::{CliError, CliResult, EXIT_PARTIAL};
