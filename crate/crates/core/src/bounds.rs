//! Iteration bounds and schedule lengths for every method in the crate.
//!
//! Bounds that are ceilings of a real expression are returned as integers;
//! the restart totals are real-valued and returned as `f64` together with
//! an integer floor for exact comparisons.

/// `⌈x⌉`, treating values within `1e-9` relative of an integer as that
/// integer so that e.g. `2 / 0.1²` gives 200 rather than 201.
pub fn ceil_count(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r.max(0.0) as u64
    } else {
        x.ceil().max(0.0) as u64
    }
}

fn floor_count(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r.max(0.0) as u64
    } else {
        x.floor().max(0.0) as u64
    }
}

/// Adaptive switching method: `⌈2 max{M_f², M_g²} Θ₀² / ε²⌉`.
pub fn adaptive_md_bound(m_f: f64, m_g: f64, theta0_sq: f64, epsilon: f64) -> u64 {
    ceil_count(2.0 * m_f.max(m_g).powi(2) * theta0_sq / (epsilon * epsilon))
}

/// General-objective method: `⌈2 max{1, M_g²} Θ₀² / ε²⌉`.
pub fn general_md_bound(m_g: f64, theta0_sq: f64, epsilon: f64) -> u64 {
    ceil_count(2.0 * m_g.powi(2).max(1.0) * theta0_sq / (epsilon * epsilon))
}

/// Adaptive stochastic method: `⌈4 max{M_f², M_g²} Θ₀² / ε²⌉`.
pub fn adaptive_smd_bound(m_f: f64, m_g: f64, theta0_sq: f64, epsilon: f64) -> u64 {
    ceil_count(4.0 * m_f.max(m_g).powi(2) * theta0_sq / (epsilon * epsilon))
}

/// Fixed-step stochastic method: `N = ⌈70 max{M_f², M_g²} Θ₀² ln(1/σ) / ε²⌉`.
pub fn fixed_smd_iterations(m_f: f64, m_g: f64, theta0_sq: f64, epsilon: f64, sigma: f64) -> u64 {
    ceil_count(70.0 * m_f.max(m_g).powi(2) * theta0_sq * (1.0 / sigma).ln() / (epsilon * epsilon))
}

/// `log₂(μR₀² / (2ε))`, the real-valued restart horizon.
pub fn restart_horizon(mu: f64, r0_sq: f64, epsilon: f64) -> f64 {
    (mu * r0_sq / (2.0 * epsilon)).log2()
}

/// Number of restarts `p̂ = ⌈log₂(μR₀²/(2ε))⌉`, at least one.
pub fn restart_stages(mu: f64, r0_sq: f64, epsilon: f64) -> u32 {
    ceil_count(restart_horizon(mu, r0_sq, epsilon)).max(1) as u32
}

/// Stage quantities `(R_{p-1}², R_p², ε_p)` of the radius-halving schedule.
pub fn restart_stage(mu: f64, r0_sq: f64, p: u32) -> (f64, f64, f64) {
    let r_prev = r0_sq * 0.5f64.powi(p as i32 - 1);
    let r_p = r0_sq * 0.5f64.powi(p as i32);
    (r_prev, r_p, mu * r_p / 2.0)
}

/// Total inner iterations of the deterministic and expectation-controlled
/// restarts: `p̂ + 32 Ω max{M_f², M_g²} / (μ ε)`.
pub fn restart_bound(mu: f64, r0_sq: f64, epsilon: f64, omega: f64, m: f64) -> f64 {
    restart_stages(mu, r0_sq, epsilon) as f64 + 32.0 * omega * m * m / (mu * epsilon)
}

/// Integer floor of a real-valued total bound (an iteration count is an
/// integer, so `count <= bound` iff `count <= floor(bound)`).
pub fn bound_as_count(bound: f64) -> u64 {
    floor_count(bound)
}

/// Inner length of stage `p` of the expectation-controlled restart:
/// `⌈max{M_f², M_g²} Ω R_{p-1}² / ε_p²⌉`.
pub fn restart_expectation_stage_len(m: f64, omega: f64, r_prev_sq: f64, epsilon_p: f64) -> u64 {
    ceil_count(m * m * omega * r_prev_sq / (epsilon_p * epsilon_p))
}

/// `ln((1/σ) · L)` with `L = log₂(μR₀²/(2ε))` floored at 1, so the
/// logarithm stays defined when fewer than two restarts are needed.
pub fn deviation_log_factor(sigma: f64, horizon: f64) -> f64 {
    ((1.0 / sigma) * horizon.max(1.0)).ln()
}

/// Inner length of stage `p` of the deviation-controlled restart:
/// `⌈70 max{M_f², M_g²} Ω R_{p-1}² / ε_p² · ln((1/σ) L)⌉`.
pub fn restart_deviation_stage_len(m: f64, omega: f64, r_prev_sq: f64, epsilon_p: f64, log_factor: f64) -> u64 {
    ceil_count(70.0 * m * m * omega * r_prev_sq / (epsilon_p * epsilon_p) * log_factor)
}

/// Total inner iterations of the deviation-controlled restart:
/// `p̂ + 2240 Ω max{M_f², M_g²} / (μ ε) · (ln(1/σ) + ln L)`.
pub fn restart_deviation_bound(mu: f64, r0_sq: f64, epsilon: f64, omega: f64, m: f64, sigma: f64) -> f64 {
    let horizon = restart_horizon(mu, r0_sq, epsilon);
    restart_stages(mu, r0_sq, epsilon) as f64
        + 2240.0 * omega * m * m / (mu * epsilon) * deviation_log_factor(sigma, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_values() {
        assert_eq!(adaptive_md_bound(1.0, 1.0, 2f64.ln(), 0.05), 555);
        assert_eq!(adaptive_md_bound(1.0, 1.0, 1.0, 0.1), 200);
        assert_eq!(general_md_bound(1.0, 1.0, 0.1), 200);
        assert_eq!(general_md_bound(0.5, 1.0, 0.1), 200);
        assert_eq!(adaptive_smd_bound(1.0, 1.0, 1.0, 0.1), 400);
        assert_eq!(fixed_smd_iterations(1.0, 1.0, 1.0, 0.1, 0.1), 16119);
        assert_eq!(restart_stages(1.0, 4.0, 0.1), 5);
        assert_eq!(restart_bound(1.0, 4.0, 0.1, 1.0, 1.0), 325.0);
        assert_eq!(bound_as_count(restart_bound(1.0, 4.0, 0.1, 1.0, 1.0)), 325);
    }

    #[test]
    fn loose_accuracy_needs_one_stage() {
        assert_eq!(restart_stages(1.0, 4.0, 2.0), 1);
        assert_eq!(restart_stages(1.0, 4.0, 10.0), 1);
        let (prev, cur, eps1) = restart_stage(1.0, 4.0, 1);
        assert_eq!((prev, cur, eps1), (4.0, 2.0, 1.0));
    }

    #[test]
    fn deviation_bound_matches_formula() {
        let b = restart_deviation_bound(1.0, 4.0, 0.1, 1.0, 1.0, 0.1);
        let expected = 5.0 + 2240.0 * 10.0 * (10.0 * 20f64.log2()).ln();
        assert!((b - expected).abs() < 1e-9);
        let stage_sum: u64 = (1..=5)
            .map(|p| {
                let (prev, _, eps_p) = restart_stage(1.0, 4.0, p);
                restart_deviation_stage_len(1.0, 1.0, prev, eps_p, deviation_log_factor(0.1, 20f64.log2()))
            })
            .sum();
        assert!(stage_sum as f64 <= b);
        let exp_sum: u64 = (1..=5)
            .map(|p| {
                let (prev, _, eps_p) = restart_stage(1.0, 4.0, p);
                restart_expectation_stage_len(1.0, 1.0, prev, eps_p)
            })
            .sum();
        assert!(exp_sum <= 325);
    }
}
