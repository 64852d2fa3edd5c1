//! Manufactured experiments and study drivers for the `gopw` solver.

pub mod config;
pub mod experiments;
pub mod pipeline;
pub mod study;

pub use experiments::{ExampleKind, Experiment};
pub use pipeline::{run, solve, RunConfig, RunResult};
pub use study::{run_h_study, run_oracle_study, run_pollution_study, StudyResult, StudyRow};
