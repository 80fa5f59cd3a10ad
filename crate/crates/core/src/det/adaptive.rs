use super::dual::dual_value;
use super::report::{DualCertificate, Guarantee, RunTrace, SolveReport, SolverConfig, StageSummary, StepKind, TraceRecord};
use crate::bounds;
use crate::error::{Error, Result};
use crate::linalg::{axpy, dist2_sq, scale, KahanSum};
use crate::problem::ProblemInstance;
use crate::prox::{Geometry, ShiftedSetup};
use crate::verify::check_step_inequality;

pub(crate) struct InnerRun {
    pub x_bar: Vec<f64>,
    pub iterations: u64,
    pub productive_count: u64,
    pub lambda_bar: Vec<f64>,
    /// False when the guard, not the stopping rule, ended the run.
    pub completed: bool,
    pub audit_violations: u64,
}

pub(crate) struct RunOptions<'a> {
    pub epsilon: f64,
    pub theta0_sq: f64,
    pub guard: u64,
    pub stage: u32,
    pub k_offset: u64,
    pub trace: Option<&'a mut RunTrace>,
    pub audit_point: Option<&'a [f64]>,
}

/// The adaptive switching loop with stepsizes `ε / M_k²` in the dual norm of
/// `geometry`, stopping once `Σ 1/M_j² >= 2Θ₀²/ε²`.
pub(crate) fn switching_run(instance: &ProblemInstance, geometry: &dyn Geometry, mut opt: RunOptions) -> Result<InnerRun> {
    let eps = opt.epsilon;
    let threshold = 2.0 * opt.theta0_sq / (eps * eps);
    let n = geometry.dim();
    let f = instance.objective().function();
    let g = instance.constraint().function();

    let mut x = geometry.prox_center();
    let mut inv_m_sq = KahanSum::new();
    let mut weighted = vec![0.0; n];
    let mut weight = 0.0;
    let mut dual_acc = vec![0.0; instance.num_constraints()];
    let mut productive = 0u64;
    let mut violations = 0u64;
    let mut k = 0u64;

    loop {
        if k >= opt.guard {
            break;
        }
        let (gx, active) = instance.eval_constraint_with_active(&x);
        let is_productive = gx <= eps;
        let grad = if is_productive { f.subgradient(&x) } else { g.parts()[active].gradient(&x) };
        let m = geometry.dual_norm(&grad)?;
        if m == 0.0 {
            if is_productive {
                // x^k minimizes f globally and is ε-feasible.
                if let Some(t) = opt.trace.as_deref_mut() {
                    t.push(record(opt.k_offset + k, opt.stage, StepKind::Productive, 0.0, 0.0, f.value(&x), gx, None, &x));
                }
                return Ok(InnerRun {
                    x_bar: x,
                    iterations: k + 1,
                    productive_count: productive + 1,
                    lambda_bar: vec![0.0; dual_acc.len()],
                    completed: true,
                    audit_violations: violations,
                });
            }
            return Err(Error::Infeasible { value: gx });
        }
        let h = eps / (m * m);
        if let Some(u) = opt.audit_point {
            let which = if is_productive { f } else { g };
            let c = check_step_inequality(geometry, which, &x, u, h, &vec![0.0; n])?;
            if !c.holds {
                violations += 1;
            }
        }
        if let Some(t) = opt.trace.as_deref_mut() {
            let kind = if is_productive { StepKind::Productive } else { StepKind::Nonproductive };
            let idx = (!is_productive).then_some(active);
            t.push(record(opt.k_offset + k, opt.stage, kind, m, h, f.value(&x), gx, idx, &x));
        }
        if is_productive {
            axpy(&mut weighted, h, &x);
            weight += h;
            productive += 1;
        } else {
            dual_acc[active] += h;
        }
        x = geometry.mirror_step(&x, &scale(&grad, h))?;
        inv_m_sq.add(1.0 / (m * m));
        k += 1;
        if inv_m_sq.value() >= threshold {
            break;
        }
    }

    let completed = inv_m_sq.value() >= threshold;
    if weight == 0.0 {
        return Err(Error::NoProductiveSteps { iterations: k });
    }
    Ok(InnerRun {
        x_bar: scale(&weighted, 1.0 / weight),
        iterations: k,
        productive_count: productive,
        lambda_bar: dual_acc.iter().map(|a| a / weight).collect(),
        completed,
        audit_violations: violations,
    })
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn record(
    k: u64,
    stage: u32,
    step_kind: StepKind,
    m_k: f64,
    h_k: f64,
    f_val: f64,
    g_val: f64,
    active_index: Option<usize>,
    x: &[f64],
) -> TraceRecord {
    TraceRecord { k, stage, step_kind, m_k, h_k, f_val, g_val, active_index, x: x.to_vec() }
}

fn audit_point<'a>(instance: &'a ProblemInstance, config: &SolverConfig) -> Result<Option<&'a [f64]>> {
    if !config.audit_step_inequality {
        return Ok(None);
    }
    match instance.known_optimum() {
        Some(opt) => Ok(Some(&opt.x_star)),
        None => Err(Error::InvalidArgument("step audit needs a known optimum".into())),
    }
}

fn certificate(instance: &ProblemInstance, lambda_bar: Vec<f64>) -> DualCertificate {
    let phi_value = dual_value(instance, &lambda_bar).ok();
    DualCertificate { lambda_bar, phi_value }
}

/// Adaptive switching mirror descent for Lipschitz `f` and `g`.
///
/// Starts at the prox center, takes productive steps `h = ε/|∇f|²_*` while
/// `g(x^k) <= ε` and constraint steps `h = ε/|∇g|²_*` otherwise, and stops
/// once `Σ 1/M_j² >= 2Θ₀²/ε²`. Returns the `h`-weighted mean of the
/// productive iterates, which is an ε-solution whenever `d(x*) <= Θ₀²`.
///
/// With `recover_dual`, multipliers `λ̄_i = Σ_{j nonproductive, i(j)=i} h_j /
/// Σ_{j productive} h_j` are attached; this requires `Θ₀² >= max_X d`.
pub fn adaptive_md(instance: &ProblemInstance, config: &SolverConfig) -> Result<SolveReport> {
    config.validate()?;
    if config.recover_dual && !instance.theta0_bounds_prox() {
        return Err(Error::Unsupported(format!(
            "dual recovery needs theta0_sq >= max_X d = {}",
            instance.setup().max_prox_value()
        )));
    }
    let eps = config.epsilon;
    let bound = bounds::adaptive_md_bound(
        instance.objective().lipschitz(),
        instance.constraint().lipschitz(),
        instance.theta0_sq(),
        eps,
    );
    let guard = config.guard(Some(bound))?;
    let mut trace = config.record_trace.then(RunTrace::default);
    let run = switching_run(
        instance,
        instance.setup(),
        RunOptions {
            epsilon: eps,
            theta0_sq: instance.theta0_sq(),
            guard,
            stage: 0,
            k_offset: 0,
            trace: trace.as_mut(),
            audit_point: audit_point(instance, config)?,
        },
    )?;
    let dual = config.recover_dual.then(|| certificate(instance, run.lambda_bar.clone()));
    Ok(SolveReport {
        f_bar: instance.f(&run.x_bar),
        g_bar: instance.g(&run.x_bar),
        x_bar: run.x_bar,
        iterations: run.iterations,
        productive_count: run.productive_count,
        theoretical_bound: Some(bound),
        within_bound: run.iterations <= bound,
        dual,
        guarantee: if run.completed { Guarantee::EpsSolution } else { Guarantee::None },
        eps_tilde: None,
        trace,
        stages: Vec::new(),
        audit_violations: run.audit_violations,
        mu_certified: None,
    })
}

/// Parameters of the radius-halving restart schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestartParams {
    /// Common strong-convexity modulus of `f` and `g`.
    pub mu: f64,
    /// Bound on `2 d` over the unit ball; defaults to the setup's value
    /// (1 for Euclidean setups).
    pub omega: Option<f64>,
}

impl RestartParams {
    pub fn new(mu: f64) -> Self {
        Self { mu, omega: None }
    }
}

pub(crate) struct RestartPlan {
    pub mu: f64,
    pub omega: f64,
    pub x0: Vec<f64>,
    pub r0_sq: f64,
    pub stages: u32,
    pub mu_certified: bool,
}

pub(crate) fn plan_restart(instance: &ProblemInstance, params: &RestartParams, epsilon: f64) -> Result<RestartPlan> {
    if !(params.mu.is_finite() && params.mu > 0.0) {
        return Err(Error::InvalidArgument(format!("mu must be positive, got {}", params.mu)));
    }
    if instance.setup().is_entropy() {
        return Err(Error::Unsupported("restarts need a Euclidean setup".into()));
    }
    let omega = match params.omega {
        Some(o) if o.is_finite() && o > 0.0 => o,
        Some(o) => return Err(Error::InvalidArgument(format!("omega must be positive, got {o}"))),
        None => instance
            .setup()
            .restart_omega()
            .ok_or_else(|| Error::Unsupported("no certified omega for this setup".into()))?,
    };
    let (Some(x0), Some(r0_sq)) = (instance.x0(), instance.r0_sq()) else {
        return Err(Error::InvalidArgument("restarts need a starting point x0 and r0_sq".into()));
    };
    Ok(RestartPlan {
        mu: params.mu,
        omega,
        x0: x0.to_vec(),
        r0_sq,
        stages: bounds::restart_stages(params.mu, r0_sq, epsilon),
        mu_certified: instance.objective().mu() >= params.mu && instance.constraint().mu() >= params.mu,
    })
}

/// Restarted adaptive mirror descent for strongly convex `f` and `g`.
///
/// Stage `p = 1..p̂` (`p̂ = ⌈log₂(μR₀²/(2ε))⌉`, at least 1) runs the
/// adaptive method at accuracy `ε_p = μR_p²/2`, `R_p² = R₀² 2^{-p}`, with
/// the prox-function `d((x - x_{p-1})/R_{p-1})` and `Θ₀² = Ω/2`. The
/// multipliers of the last stage are attached when requested.
pub fn restarted_md(instance: &ProblemInstance, config: &SolverConfig, params: &RestartParams) -> Result<SolveReport> {
    config.validate()?;
    let eps = config.epsilon;
    let plan = plan_restart(instance, params, eps)?;
    let m = instance.objective().lipschitz().max(instance.constraint().lipschitz());
    let total_bound = bounds::restart_bound(plan.mu, plan.r0_sq, eps, plan.omega, m);
    let audit = audit_point(instance, config)?;
    let x_star = instance.known_optimum().map(|o| o.x_star.clone());

    let mut trace = config.record_trace.then(RunTrace::default);
    let mut x = plan.x0.clone();
    let mut total = 0u64;
    let mut productive = 0u64;
    let mut violations = 0u64;
    let mut completed = true;
    let mut stages = Vec::with_capacity(plan.stages as usize);
    let mut lambda_bar = Vec::new();
    for p in 1..=plan.stages {
        let (r_prev_sq, r_sq, eps_p) = bounds::restart_stage(plan.mu, plan.r0_sq, p);
        let geometry = ShiftedSetup::new(instance.setup(), x.clone(), r_prev_sq.sqrt())?;
        let stage_bound = bounds::adaptive_md_bound(m * r_prev_sq.sqrt(), 0.0, plan.omega / 2.0, eps_p);
        let guard = match config.max_iterations_guard {
            Some(g) => g.max(stage_bound),
            None => stage_bound.saturating_mul(10).max(1),
        };
        let run = switching_run(
            instance,
            &geometry,
            RunOptions {
                epsilon: eps_p,
                theta0_sq: plan.omega / 2.0,
                guard,
                stage: p,
                k_offset: total,
                trace: trace.as_mut(),
                audit_point: audit,
            },
        )?;
        total += run.iterations;
        productive += run.productive_count;
        violations += run.audit_violations;
        completed &= run.completed;
        x = run.x_bar;
        stages.push(StageSummary {
            p,
            epsilon_p: eps_p,
            radius_sq: r_sq,
            iterations: run.iterations,
            productive_count: run.productive_count,
            dist_sq_to_opt: x_star.as_ref().map(|s| dist2_sq(&x, s)),
        });
        lambda_bar = run.lambda_bar;
    }
    let dual = config.recover_dual.then(|| certificate(instance, lambda_bar));
    let bound = bounds::bound_as_count(total_bound);
    Ok(SolveReport {
        f_bar: instance.f(&x),
        g_bar: instance.g(&x),
        x_bar: x,
        iterations: total,
        productive_count: productive,
        theoretical_bound: Some(bound),
        within_bound: total <= bound,
        dual,
        guarantee: if completed { Guarantee::EpsSolution } else { Guarantee::None },
        eps_tilde: None,
        trace,
        stages,
        audit_violations: violations,
        mu_certified: Some(plan.mu_certified),
    })
}
