//! Experiment harness for the ABC extremes toolkit: configuration files,
//! synthetic gold-standard data, the three experiment drivers, and the
//! post-processing subcommands behind the `abc-extremes` binary.

pub mod commands;
pub mod config;
pub mod experiments;
pub mod ingest;
pub mod manifest;
pub mod synth;

pub use config::{Config, ExperimentKind};
pub use manifest::RunManifest;
