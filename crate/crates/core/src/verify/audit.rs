//! Randomized audits of the mirror-step machinery.

use serde::Serialize;

use crate::error::{check_dim, Result};
use crate::linalg::{add, dot, scale, sub};
use crate::problem::PointwiseMax;
use crate::prox::{FeasibleSet, Geometry, ProximalSetup};
use crate::rng::Rng;
use rand::Rng as _;

/// Absolute slack allowed by the step-inequality audit.
pub const STEP_SLACK: f64 = 1e-9;

/// Both sides of the one-step mirror-descent inequality
/// `h (f(x) - f(u) + <Δ, x - u>) <= h²/2 |∇f(x) + Δ|²_* + V[x](u) - V[x₊](u)`
/// with `x₊ = Mirr[x](h (∇f(x) + Δ))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn check_step_inequality(
    geometry: &dyn Geometry,
    f: &PointwiseMax,
    x: &[f64],
    u: &[f64],
    h: f64,
    delta: &[f64],
) -> Result<StepCheck> {
    let n = geometry.dim();
    check_dim(n, x.len())?;
    check_dim(n, u.len())?;
    check_dim(n, delta.len())?;
    let direction = add(&f.subgradient(x), delta);
    let x_next = geometry.mirror_step(x, &scale(&direction, h))?;
    let lhs = h * (f.value(x) - f.value(u) + dot(delta, &sub(x, u)));
    let rhs = 0.5 * h * h * geometry.dual_norm(&direction)?.powi(2) + geometry.bregman(x, u)? - geometry.bregman(&x_next, u)?;
    Ok(StepCheck { lhs, rhs, holds: lhs <= rhs + STEP_SLACK })
}

/// Summary of a randomized audit: number of trials and of violations, plus
/// the worst observed slack (negative means a violation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditSummary {
    pub trials: usize,
    pub violations: usize,
    pub worst_slack: f64,
}

impl AuditSummary {
    fn new() -> Self {
        Self { trials: 0, violations: 0, worst_slack: f64::INFINITY }
    }

    fn record(&mut self, slack: f64, ok: bool) {
        self.trials += 1;
        if !ok {
            self.violations += 1;
        }
        self.worst_slack = self.worst_slack.min(slack);
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn random_vector(rng: &mut Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * (2.0 * rng.random::<f64>() - 1.0)).collect()
}

/// Interior point for setups whose `∇d` needs strictly positive arguments.
fn sample_point(geometry: &dyn Geometry, rng: &mut Rng) -> Vec<f64> {
    geometry.set().sample_interior(rng)
}

/// Random instances of the step inequality with a random max-of-affine `f`,
/// random `x`, `u`, `h` in `(0, 2]` and `Δ`.
pub fn audit_step_inequality(geometry: &dyn Geometry, trials: usize, rng: &mut Rng) -> Result<AuditSummary> {
    use crate::problem::Quadratic;
    let n = geometry.dim();
    let mut summary = AuditSummary::new();
    for _ in 0..trials {
        let parts = (0..1 + rng.random_range(0..3))
            .map(|_| Quadratic::affine(random_vector(rng, n, 2.0), 2.0 * rng.random::<f64>() - 1.0))
            .collect();
        let f = PointwiseMax::new(parts)?;
        let x = sample_point(geometry, rng);
        let u = sample_point(geometry, rng);
        let h = 2.0 * rng.random::<f64>() + 1e-6;
        let delta = random_vector(rng, n, 0.5);
        let c = check_step_inequality(geometry, &f, &x, &u, h, &delta)?;
        summary.record(c.rhs - c.lhs, c.holds);
    }
    Ok(summary)
}

/// Variational inequality of the mirror step:
/// `<p + ∇d(x₊) - ∇d(x), u - x₊> >= -1e-8` at sampled `u`.
pub fn audit_mirror_step(
    geometry: &dyn Geometry,
    pairs: usize,
    points_per_pair: usize,
    rng: &mut Rng,
) -> Result<AuditSummary> {
    let n = geometry.dim();
    let mut summary = AuditSummary::new();
    for _ in 0..pairs {
        let x = sample_point(geometry, rng);
        let p = random_vector(rng, n, 3.0);
        let x_next = geometry.mirror_step(&x, &p)?;
        let ok_member = geometry.set().contains(&x_next);
        let w = add(&p, &sub(&geometry.prox_gradient(&x_next)?, &geometry.prox_gradient(&x)?));
        let mut worst = f64::INFINITY;
        for _ in 0..points_per_pair {
            let u = sample_point(geometry, rng);
            worst = worst.min(dot(&w, &sub(&u, &x_next)));
        }
        summary.record(worst + 1e-8, ok_member && worst >= -1e-8);
    }
    Ok(summary)
}

/// `d(y) - d(x) - <∇d(x), y - x> >= ½|y - x|² - 1e-9` on sampled pairs.
pub fn audit_strong_convexity(geometry: &dyn Geometry, trials: usize, rng: &mut Rng) -> Result<AuditSummary> {
    let mut summary = AuditSummary::new();
    for _ in 0..trials {
        let x = sample_point(geometry, rng);
        let y = sample_point(geometry, rng);
        let gap = geometry.bregman(&x, &y)? - 0.5 * geometry.norm(&sub(&y, &x))?.powi(2);
        summary.record(gap + 1e-9, gap >= -1e-9);
    }
    Ok(summary)
}

/// `|g|_* = max_{|y| <= 1} <g, y>` within `1e-6`, with the maximum
/// taken over the extreme points of the unit ball (coordinate vectors for
/// the ℓ1 ball, `g / |g|` for the Euclidean ball) plus random unit vectors
/// that must never exceed the dual norm.
pub fn audit_norm_duality(setup: &ProximalSetup, trials: usize, rng: &mut Rng) -> Result<AuditSummary> {
    use crate::prox::NormKind;
    let n = setup.dim();
    let mut summary = AuditSummary::new();
    for _ in 0..trials {
        let g = random_vector(rng, n, 5.0);
        let dual = setup.dual_norm(&g)?;
        let mut best = f64::NEG_INFINITY;
        match setup.norm_kind() {
            NormKind::L1 => {
                best = g.iter().fold(best, |m, v| m.max(v.abs()));
            }
            NormKind::L2 => {
                let gn = setup.norm(&g)?;
                if gn > 0.0 {
                    best = dot(&g, &scale(&g, 1.0 / gn));
                } else {
                    best = 0.0;
                }
            }
        }
        let mut exceeded = false;
        for _ in 0..16 {
            let y = random_vector(rng, n, 1.0);
            let ny = setup.norm(&y)?;
            if ny > 0.0 && dot(&g, &y) / ny > dual + 1e-9 {
                exceeded = true;
            }
        }
        let err = (best - dual).abs();
        summary.record(1e-6 - err, err <= 1e-6 && !exceeded);
    }
    Ok(summary)
}

/// Entropy mirror step against the multiplicative-weights closed form.
pub fn audit_multiplicative_weights(setup: &ProximalSetup, trials: usize, rng: &mut Rng) -> Result<AuditSummary> {
    let n = setup.dim();
    let mut summary = AuditSummary::new();
    for _ in 0..trials {
        let x = FeasibleSet::simplex(n).sample_interior(rng);
        let p = random_vector(rng, n, 3.0);
        let got = setup.mirror_step(&x, &p)?;
        let w: Vec<f64> = x.iter().zip(&p).map(|(xi, pi)| xi * (-pi).exp()).collect();
        let s: f64 = w.iter().sum();
        let err = got.iter().zip(&w).map(|(a, b)| (a - b / s).abs()).fold(0.0, f64::max);
        summary.record(1e-12 - err, err <= 1e-12);
    }
    Ok(summary)
}

/// Midpoint convexity of `V[z](·)`: `V[z]((a+b)/2) <= (V[z](a) + V[z](b))/2 + 1e-10`.
pub fn audit_bregman_convexity(geometry: &dyn Geometry, trials: usize, rng: &mut Rng) -> Result<AuditSummary> {
    let mut summary = AuditSummary::new();
    for _ in 0..trials {
        let z = sample_point(geometry, rng);
        let a = sample_point(geometry, rng);
        let b = sample_point(geometry, rng);
        let mid = scale(&add(&a, &b), 0.5);
        let gap = 0.5 * (geometry.bregman(&z, &a)? + geometry.bregman(&z, &b)?) - geometry.bregman(&z, &mid)?;
        summary.record(gap + 1e-10, gap >= -1e-10);
    }
    Ok(summary)
}

/// A geometry whose Bregman divergence has the wrong sign. Used as a
/// negative control: the step-inequality audit must reject it.
pub struct NegatedBregman<'a>(pub &'a dyn Geometry);

impl Geometry for NegatedBregman<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn set(&self) -> &FeasibleSet {
        self.0.set()
    }
    fn norm(&self, x: &[f64]) -> Result<f64> {
        self.0.norm(x)
    }
    fn dual_norm(&self, g: &[f64]) -> Result<f64> {
        self.0.dual_norm(g)
    }
    fn prox_value(&self, x: &[f64]) -> Result<f64> {
        self.0.prox_value(x)
    }
    fn prox_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.0.prox_gradient(x)
    }
    fn bregman(&self, z: &[f64], x: &[f64]) -> Result<f64> {
        Ok(-self.0.bregman(z, x)?)
    }
    fn mirror_step(&self, x: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        self.0.mirror_step(x, p)
    }
    fn prox_center(&self) -> Vec<f64> {
        self.0.prox_center()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Quadratic;
    use crate::rng;

    fn setups() -> Vec<ProximalSetup> {
        vec![
            ProximalSetup::entropy(3).unwrap(),
            ProximalSetup::euclidean(FeasibleSet::simplex(3), None).unwrap(),
            ProximalSetup::euclidean(FeasibleSet::unit_box(2), Some(vec![0.2, 0.2])).unwrap(),
        ]
    }

    #[test]
    fn step_inequality_trivial_cases() {
        for s in setups() {
            let n = s.dim();
            let f = PointwiseMax::single(Quadratic::affine(vec![1.0; n], 0.0));
            let x = s.prox_center();
            let c = check_step_inequality(&s, &f, &x, &x, 0.7, &vec![0.0; n]).unwrap();
            assert_eq!(c.lhs, 0.0);
            assert!(c.rhs >= 0.0 && c.holds);
            let tiny = check_step_inequality(&s, &f, &x, &s.set().natural_center(), 1e-12, &vec![0.0; n]).unwrap();
            assert!(tiny.lhs.abs() < 1e-10 && tiny.rhs.abs() < 1e-10);
        }
    }

    #[test]
    fn randomized_audits_pass() {
        let mut r = rng::from_seed(3);
        for s in setups() {
            assert!(audit_step_inequality(&s, 500, &mut r).unwrap().passed());
            assert!(audit_mirror_step(&s, 200, 20, &mut r).unwrap().passed());
            assert!(audit_strong_convexity(&s, 500, &mut r).unwrap().passed());
            assert!(audit_norm_duality(&s, 200, &mut r).unwrap().passed());
            assert!(audit_bregman_convexity(&s, 500, &mut r).unwrap().passed());
        }
        assert!(audit_multiplicative_weights(&ProximalSetup::entropy(4).unwrap(), 500, &mut r).unwrap().passed());
    }

    #[test]
    fn negated_bregman_is_caught() {
        let mut r = rng::from_seed(4);
        let s = ProximalSetup::entropy(3).unwrap();
        let bad = NegatedBregman(&s);
        assert!(!audit_step_inequality(&bad, 200, &mut r).unwrap().passed());
    }
}
