//! Stochastic switching mirror descent: the adaptive method with
//! expectation control, the fixed-step method with large-deviation control,
//! and their radius-halving restarts for strongly convex problems.

mod methods;

pub use methods::{
    adaptive_smd, fixed_smd, restarted_smd_deviation, restarted_smd_expectation, StochasticReport,
    StochasticRunConfig,
};

#[cfg(test)]
mod tests;
