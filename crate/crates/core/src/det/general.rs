use super::adaptive::record;
use super::report::{Guarantee, RunTrace, SolveReport, SolverConfig, StepKind};
use crate::bounds;
use crate::error::{Error, Result};
use crate::linalg::scale;
use crate::problem::ProblemInstance;
use crate::prox::Geometry;
use crate::verify::check_step_inequality;

/// `ε̃ = max{ε, ε max_i |∇f_i(x*)|_* + ε² max_i L_i / 2}`.
pub fn eps_tilde(epsilon: f64, grad_norm_at_opt: f64, gradient_lipschitz: f64) -> f64 {
    epsilon.max(epsilon * grad_norm_at_opt + epsilon * epsilon * gradient_lipschitz / 2.0)
}

/// Switching mirror descent for objectives without a Lipschitz bound.
///
/// Productive steps use `h = ε/|∇f(x^k)|_*` (normalized subgradient),
/// constraint steps `h = ε/|∇g(x^k)|²_*`; the run stops once
/// `|I| + Σ_J |∇g(x^j)|_*^{-2} >= 2Θ₀²/ε²` and returns the productive
/// iterate with the smallest `f`. When `f` is a max of smooth pieces and
/// the instance carries smoothness constants (given, or evaluated at a
/// known optimum), the report certifies an `ε̃`-solution.
pub fn general_md(instance: &ProblemInstance, config: &SolverConfig) -> Result<SolveReport> {
    config.validate()?;
    let eps = config.epsilon;
    let theta0_sq = instance.theta0_sq();
    let bound = bounds::general_md_bound(instance.constraint().lipschitz(), theta0_sq, eps);
    let guard = config.guard(Some(bound))?;
    let threshold = 2.0 * theta0_sq / (eps * eps);
    let geometry = instance.setup();
    let n = geometry.dim();
    let f = instance.objective().function();
    let g = instance.constraint().function();
    let audit = if config.audit_step_inequality {
        Some(
            instance
                .known_optimum()
                .ok_or_else(|| Error::InvalidArgument("step audit needs a known optimum".into()))?
                .x_star
                .clone(),
        )
    } else {
        None
    };

    let mut trace = config.record_trace.then(RunTrace::default);
    let mut x = geometry.prox_center();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut productive = 0u64;
    let mut inv_sq = 0.0;
    let mut violations = 0u64;
    let mut k = 0u64;
    let mut completed = false;
    while k < guard {
        let (gx, active) = instance.eval_constraint_with_active(&x);
        let is_productive = gx <= eps;
        let grad = if is_productive { f.subgradient(&x) } else { g.parts()[active].gradient(&x) };
        let m = geometry.dual_norm(&grad)?;
        let fx = f.value(&x);
        if m == 0.0 {
            if !is_productive {
                return Err(Error::Infeasible { value: gx });
            }
            if let Some(t) = trace.as_mut() {
                t.push(record(k, 0, StepKind::Productive, 0.0, 0.0, fx, gx, None, &x));
            }
            best = Some((fx, x));
            productive += 1;
            k += 1;
            completed = true;
            break;
        }
        let h = if is_productive { eps / m } else { eps / (m * m) };
        if let Some(u) = &audit {
            let which = if is_productive { f } else { g };
            if !check_step_inequality(geometry, which, &x, u, h, &vec![0.0; n])?.holds {
                violations += 1;
            }
        }
        if let Some(t) = trace.as_mut() {
            let kind = if is_productive { StepKind::Productive } else { StepKind::Nonproductive };
            t.push(record(k, 0, kind, m, h, fx, gx, (!is_productive).then_some(active), &x));
        }
        if is_productive {
            productive += 1;
            inv_sq += 1.0;
            if best.as_ref().is_none_or(|(b, _)| fx < *b) {
                best = Some((fx, x.clone()));
            }
        } else {
            inv_sq += 1.0 / (m * m);
        }
        x = geometry.mirror_step(&x, &scale(&grad, h))?;
        k += 1;
        if inv_sq >= threshold {
            completed = true;
            break;
        }
    }
    let (f_bar, x_bar) = best.ok_or(Error::NoProductiveSteps { iterations: k })?;
    let tilde = instance.smoothness().map(|s| eps_tilde(eps, s.grad_norm_at_opt, s.gradient_lipschitz));
    let guarantee = match (completed, tilde) {
        (true, Some(_)) => Guarantee::EpsTildeSolution,
        _ => Guarantee::None,
    };
    Ok(SolveReport {
        g_bar: instance.g(&x_bar),
        f_bar,
        x_bar,
        iterations: k,
        productive_count: productive,
        theoretical_bound: Some(bound),
        within_bound: k <= bound,
        dual: None,
        guarantee,
        eps_tilde: tilde,
        trace,
        stages: Vec::new(),
        audit_violations: violations,
        mu_certified: None,
    })
}
