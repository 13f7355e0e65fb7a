//! Batch driver for spectral sum-rule verification: config parsing, rule
//! dispatch, presets, convergence sweeps and file export.

pub mod config;
pub mod export;
pub mod preset;
pub mod run;
pub mod sweep;

pub use config::{ConfigError, RunConfig};
pub use run::{run, Report, RuleRecord, RunError, RunOptions};
