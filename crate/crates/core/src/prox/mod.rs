//! Proximal setups: norm pairs, prox-functions, Bregman divergences and the
//! mirror step `argmin_{u in X} <p, u> + V[x](u)`.
//!
//! Two setups are supported:
//!
//! | setup     | norm | prox-function `d`               | sets                    |
//! |-----------|------|---------------------------------|-------------------------|
//! | Euclidean | l2   | `½|x - c|²`                     | box, simplex, ball ∩ base |
//! | entropy   | l1   | `Σ x_i ln x_i + ln n`           | simplex                 |
//!
//! Both have closed-form mirror steps: a Euclidean projection, and the
//! multiplicative-weights update respectively. [`ShiftedSetup`] rescales a
//! Euclidean setup around a new center, which is what the restart schemes
//! use between stages.

mod set;
mod setup;

pub use set::{project_simplex, FeasibleSet, BALL_TOL, MEMBERSHIP_TOL};
pub use setup::{Geometry, NormKind, ProxKind, ProximalSetup, ShiftedSetup, ENTROPY_FLOOR};
