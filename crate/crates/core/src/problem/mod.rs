//! Problem instances: objective and max-type constraint oracles, stochastic
//! subgradient oracles, and generators for the standard test problems.

mod functions;
mod instance;
mod oracle;

pub use functions::{PointwiseMax, Quadratic};
pub use instance::{
    audit_subgradient_inequality, make_linear_max_problem, make_quadratic_simplex_problem, InstanceBuilder,
    OracleMethod, OracleResult, ProblemInstance, SmoothnessConstants, SubgradientOracle, AUDIT_SAMPLES,
    SLATER_SAMPLES,
};
pub use oracle::{column_sample_gradient, OracleSpec, StochasticGradient, StochasticOracle, SIMPLEX_SAMPLE_TOL};
