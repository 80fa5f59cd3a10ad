//! Independent oracles and audits used to certify solver output.

mod audit;
mod oracles;
mod stats;
mod suite;

pub use crate::problem::{OracleMethod, OracleResult};
pub use oracles::{grid_minimize, grid_optimum, vertex_optimum, MAX_GRID_DIM, MAX_GRID_POINTS};
pub use audit::{
    audit_bregman_convexity, audit_mirror_step, audit_multiplicative_weights, audit_norm_duality,
    audit_step_inequality, audit_strong_convexity, check_step_inequality, AuditSummary, NegatedBregman, StepCheck,
    STEP_SLACK,
};
pub use stats::{
    binomial_band, deviation_experiment, mean_std, reference_optimum, unbiasedness_test, BiasedOracle,
    DeviationExperiment, UnbiasednessOutcome, DEVIATION_GRID_RESOLUTION, MIN_UNBIASEDNESS_SAMPLES,
};
pub use suite::{verify_suite, CheckOutcome, CheckStatus, Fault, SuiteOptions, SuiteReport};
