//! Configuration, seeding, orchestration and report writing for the
//! `coarse-op` experiment harness.

pub mod config;
pub mod report;
pub mod run;
pub mod seeds;

pub use config::{diagnostics, Diagnostic, ExperimentConfig, ExperimentKind};
pub use run::{run, Failure, RunOutput};
