//! Deterministic switching mirror descent: the adaptive method, its
//! strongly convex restart, the general-objective variant, and dual
//! certificate recovery.

mod adaptive;
mod dual;
mod general;
mod report;

pub(crate) use adaptive::{plan_restart, record};
pub use adaptive::{adaptive_md, restarted_md, RestartParams};
pub use dual::dual_value;
pub use general::{eps_tilde, general_md};
pub use report::{
    DualCertificate, Guarantee, RunTrace, SolveReport, SolverConfig, StageSummary, StepKind, TraceRecord,
};

#[cfg(test)]
mod tests;
