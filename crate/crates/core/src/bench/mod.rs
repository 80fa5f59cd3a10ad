//! Config-driven experiment execution behind the `switchmd` binary.

mod config;
mod runner;

pub use config::{
    ExperimentConfig, InstanceDescription, InstanceKind, Outputs, SetupName, SolverName, SolverParams, SCHEMA_VERSION,
};
pub use runner::{execute, run, sweep, DualReport, ReportGuarantee, RunOptions, RunReport, SweepAggregate};
