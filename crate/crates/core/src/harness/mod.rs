//! Experiment harness: configuration files, the experiment registry and
//! reproducible run manifests.

pub mod config;
pub mod run;

pub use config::{ExperimentConfig, ExperimentId, SectionKind};
pub use run::{
    declared_checks, expected_checks, experiment_title, last_gap_excess, run_experiment, transfer_tolerance,
    trend_excess, CheckResult, RunManifest, SectionOutcome, Table, TrendPoint,
};
