//! Batch experiment front end: config parsing, dispatch, and file output.
//!
//! One experiment family per invocation, driven by a TOML config
//! (`key = value` with sections). Outputs are CSV data files plus a
//! `summary.json`, all formatted deterministically so a fixed config and
//! seed reproduce byte-identical files.

mod config;
mod runners;

pub use config::{ExperimentConfig, ExperimentKind, ModelSection, NoiseSection, RunSection};
pub use runners::{run_experiment, ExperimentOutcome};
