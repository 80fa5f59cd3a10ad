use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::det::{plan_restart, record, RestartParams, RunTrace, StageSummary, StepKind};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dist2_sq, scale, KahanSum};
use crate::problem::{ProblemInstance, StochasticGradient, StochasticOracle};
use crate::prox::{FeasibleSet, Geometry, ShiftedSetup};
use crate::rng::{self, Rng};

/// Settings of a stochastic run. The random stream is
/// `rng::stream(seed, replicate)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticRunConfig {
    pub epsilon: f64,
    /// Confidence level in `(0, 0.5)` for the large-deviation methods.
    #[serde(default)]
    pub sigma: Option<f64>,
    pub seed: u64,
    #[serde(default)]
    pub replicate: u64,
    /// Overrides the iteration count of the fixed-step method.
    #[serde(default)]
    pub fixed_n: Option<u64>,
    #[serde(default)]
    pub record_trace: bool,
}

impl StochasticRunConfig {
    pub fn new(epsilon: f64, seed: u64) -> Self {
        Self { epsilon, sigma: None, seed, replicate: 0, fixed_n: None, record_trace: false }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = Some(sigma);
        self
    }

    pub fn with_fixed_n(mut self, n: u64) -> Self {
        self.fixed_n = Some(n);
        self
    }

    pub fn with_replicate(mut self, replicate: u64) -> Self {
        self.replicate = replicate;
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if let Some(s) = self.sigma {
            if !(s > 0.0 && s < 0.5) {
                return Err(Error::InvalidArgument(format!("sigma out of (0,0.5): {s}")));
            }
        }
        Ok(())
    }

    fn sigma(&self) -> Result<f64> {
        self.sigma.ok_or_else(|| Error::InvalidArgument("this method needs sigma".into()))
    }

    fn rng(&self) -> Rng {
        rng::stream(self.seed, self.replicate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticReport {
    /// Mean of the productive iterates; absent when there were none.
    pub x_bar: Option<Vec<f64>>,
    pub f_bar: Option<f64>,
    pub g_bar: Option<f64>,
    pub iterations: u64,
    pub productive_count: u64,
    pub empty_output: bool,
    pub theoretical_bound: Option<u64>,
    pub within_bound: bool,
    pub trace: Option<RunTrace>,
    pub stages: Vec<StageSummary>,
    /// Restart stages without productive steps (their start point is kept).
    pub empty_stages: u32,
    pub mu_certified: Option<bool>,
}

impl StochasticReport {
    fn finish(
        instance: &ProblemInstance,
        x_bar: Option<Vec<f64>>,
        iterations: u64,
        productive_count: u64,
        bound: Option<u64>,
        trace: Option<RunTrace>,
    ) -> Self {
        Self {
            f_bar: x_bar.as_ref().map(|x| instance.f(x)),
            g_bar: x_bar.as_ref().map(|x| instance.g(x)),
            empty_output: x_bar.is_none(),
            x_bar,
            iterations,
            productive_count,
            theoretical_bound: bound,
            within_bound: bound.is_none_or(|b| iterations <= b),
            trace,
            stages: Vec::new(),
            empty_stages: 0,
            mu_certified: None,
        }
    }
}

struct Oracles<'a> {
    f: &'a StochasticOracle,
    g: &'a StochasticOracle,
    m_f: f64,
    m_g: f64,
}

impl Oracles<'_> {
    fn m(&self) -> f64 {
        self.m_f.max(self.m_g)
    }
}

fn oracles(instance: &ProblemInstance) -> Result<Oracles<'_>> {
    let f = instance
        .stoch_objective()
        .ok_or_else(|| Error::InvalidArgument("missing stochastic objective oracle".into()))?;
    let g = instance
        .stoch_constraint()
        .ok_or_else(|| Error::InvalidArgument("missing stochastic constraint oracle".into()))?;
    Ok(Oracles {
        m_f: f.bound().max(instance.objective().lipschitz()),
        m_g: g.bound().max(instance.constraint().lipschitz()),
        f,
        g,
    })
}

/// Draws from `oracle` and enforces its almost-sure bound in the base norm.
fn draw(instance: &ProblemInstance, oracle: &StochasticOracle, x: &[f64], rng: &mut Rng) -> Result<Vec<f64>> {
    let s = oracle.sample(x, rng)?;
    let norm = instance.setup().norm_kind().dual_norm(&s);
    if norm > oracle.bound() * (1.0 + 1e-12) + 1e-15 {
        return Err(Error::OracleBoundViolated { norm, bound: oracle.bound() });
    }
    Ok(s)
}

/// Adaptive stochastic mirror descent.
///
/// Stepsizes `h_k = Θ₀ (Σ_{i<=k} M_i²)^{-1/2}` use the realized dual norms of
/// the sampled subgradients; the run stops once
/// `k >= (2Θ₀/ε)(Σ_{i<k} M_i²)^{1/2}` and returns the plain mean of the
/// productive iterates. Requires `Θ₀² >= sup_{x,y} V[x](y)`.
pub fn adaptive_smd(instance: &ProblemInstance, config: &StochasticRunConfig) -> Result<StochasticReport> {
    config.validate()?;
    let o = oracles(instance)?;
    if !instance.theta0_bounds_bregman() {
        return Err(Error::Unsupported(
            "adaptive stochastic method needs theta0_sq >= sup V[x](y), which this setup cannot certify".into(),
        ));
    }
    let eps = config.epsilon;
    let theta0 = instance.theta0_sq().sqrt();
    let bound = bounds::adaptive_smd_bound(o.m_f, o.m_g, instance.theta0_sq(), eps);
    let geometry = instance.setup();
    let f = instance.objective().function();
    let mut rng = config.rng();
    let mut trace = config.record_trace.then(RunTrace::default);

    let mut x = geometry.prox_center();
    let mut sum_sq = KahanSum::new();
    let mut acc = vec![0.0; geometry.dim()];
    let mut productive = 0u64;
    let mut k = 0u64;
    loop {
        let (gx, active) = instance.eval_constraint_with_active(&x);
        let is_productive = gx <= eps;
        let grad = draw(instance, if is_productive { o.f } else { o.g }, &x, &mut rng)?;
        let m = geometry.dual_norm(&grad)?;
        sum_sq.add(m * m);
        let total = sum_sq.value();
        let h = if total > 0.0 { theta0 / total.sqrt() } else { 0.0 };
        if let Some(t) = trace.as_mut() {
            let kind = if is_productive { StepKind::Productive } else { StepKind::Nonproductive };
            t.push(record(k, 0, kind, m, h, f.value(&x), gx, (!is_productive).then_some(active), &x));
        }
        if is_productive {
            axpy(&mut acc, 1.0, &x);
            productive += 1;
        }
        if h > 0.0 {
            x = geometry.mirror_step(&x, &scale(&grad, h))?;
        }
        k += 1;
        if k as f64 >= 2.0 * theta0 / eps * sum_sq.value().sqrt() {
            break;
        }
    }
    let x_bar = (productive > 0).then(|| scale(&acc, 1.0 / productive as f64));
    Ok(StochasticReport::finish(instance, x_bar, k, productive, Some(bound), trace))
}

struct FixedRun {
    x_bar: Option<Vec<f64>>,
    iterations: u64,
    productive: u64,
}

#[allow(clippy::too_many_arguments)]
fn fixed_run(
    instance: &ProblemInstance,
    o: &Oracles,
    geometry: &dyn Geometry,
    eps: f64,
    h: f64,
    n: u64,
    rng: &mut Rng,
    trace: Option<&mut RunTrace>,
    stage: u32,
    k_offset: u64,
) -> Result<FixedRun> {
    let f = instance.objective().function();
    let mut trace = trace;
    let mut x = geometry.prox_center();
    let mut acc = vec![0.0; geometry.dim()];
    let mut productive = 0u64;
    for k in 0..n {
        let (gx, active) = instance.eval_constraint_with_active(&x);
        let is_productive = gx <= eps;
        let grad = draw(instance, if is_productive { o.f } else { o.g }, &x, rng)?;
        if let Some(t) = trace.as_deref_mut() {
            let kind = if is_productive { StepKind::Productive } else { StepKind::Nonproductive };
            let m = geometry.dual_norm(&grad)?;
            t.push(record(k_offset + k, stage, kind, m, h, f.value(&x), gx, (!is_productive).then_some(active), &x));
        }
        if is_productive {
            axpy(&mut acc, 1.0, &x);
            productive += 1;
        }
        x = geometry.mirror_step(&x, &scale(&grad, h))?;
    }
    Ok(FixedRun {
        x_bar: (productive > 0).then(|| scale(&acc, 1.0 / productive as f64)),
        iterations: n,
        productive,
    })
}

/// Stochastic mirror descent with known constants and constant stepsize
/// `h = ε / max{M_f², M_g²}`, run for exactly `N` iterations.
///
/// `N` is `config.fixed_n` or `⌈70 max{M_f², M_g²} Θ₀² ln(1/σ)/ε²⌉`. The
/// output is the mean of the productive iterates, or empty when there were
/// none. `feasible_override` replaces the feasible set of the setup.
pub fn fixed_smd(
    instance: &ProblemInstance,
    config: &StochasticRunConfig,
    feasible_override: Option<FeasibleSet>,
) -> Result<StochasticReport> {
    config.validate()?;
    let o = oracles(instance)?;
    let eps = config.epsilon;
    let default_n = match config.sigma {
        Some(s) => {
            if !instance.theta0_bounds_bregman() {
                return Err(Error::Unsupported(
                    "the default iteration count needs theta0_sq >= sup V[x](y)".into(),
                ));
            }
            Some(bounds::fixed_smd_iterations(o.m_f, o.m_g, instance.theta0_sq(), eps, s))
        }
        None => None,
    };
    let n = config
        .fixed_n
        .or(default_n)
        .ok_or_else(|| Error::InvalidArgument("fixed-step method needs sigma or an explicit N".into()))?;
    let setup = match feasible_override {
        Some(set) => instance.setup().with_set(set)?,
        None => instance.setup().clone(),
    };
    let h = eps / o.m().powi(2);
    let mut rng = config.rng();
    let mut trace = config.record_trace.then(RunTrace::default);
    let run = fixed_run(instance, &o, &setup, eps, h, n, &mut rng, trace.as_mut(), 0, 0)?;
    Ok(StochasticReport::finish(instance, run.x_bar, run.iterations, run.productive, Some(n), trace))
}

enum RestartKind {
    Expectation,
    Deviation { log_factor: f64 },
}

fn restarted(
    instance: &ProblemInstance,
    config: &StochasticRunConfig,
    params: &RestartParams,
    kind: RestartKind,
    total_bound: impl Fn(f64, f64) -> f64,
) -> Result<StochasticReport> {
    let eps = config.epsilon;
    let o = oracles(instance)?;
    let plan = plan_restart(instance, params, eps)?;
    let m = o.m();
    let x_star = instance.known_optimum().map(|k| k.x_star.clone());
    let mut rng = config.rng();
    let mut trace = config.record_trace.then(RunTrace::default);
    let mut x = plan.x0.clone();
    let mut total = 0u64;
    let mut productive = 0u64;
    let mut empty_stages = 0u32;
    let mut last_empty = false;
    let mut stages = Vec::with_capacity(plan.stages as usize);
    for p in 1..=plan.stages {
        let (r_prev_sq, r_sq, eps_p) = bounds::restart_stage(plan.mu, plan.r0_sq, p);
        let shifted = ShiftedSetup::new(instance.setup(), x.clone(), r_prev_sq.sqrt())?;
        let (geometry, n_p) = match kind {
            RestartKind::Expectation => {
                (shifted, bounds::restart_expectation_stage_len(m, plan.omega, r_prev_sq, eps_p))
            }
            RestartKind::Deviation { log_factor } => {
                let restricted = instance.setup().set().clone().intersect_ball(x.clone(), r_prev_sq);
                (
                    shifted.restricted_to(restricted)?,
                    bounds::restart_deviation_stage_len(m, plan.omega, r_prev_sq, eps_p, log_factor),
                )
            }
        };
        let h = eps_p / (m * m * r_prev_sq);
        let run = fixed_run(instance, &o, &geometry, eps_p, h, n_p, &mut rng, trace.as_mut(), p, total)?;
        total += run.iterations;
        productive += run.productive;
        last_empty = run.x_bar.is_none();
        match run.x_bar {
            Some(xb) => x = xb,
            None => empty_stages += 1,
        }
        stages.push(StageSummary {
            p,
            epsilon_p: eps_p,
            radius_sq: r_sq,
            iterations: run.iterations,
            productive_count: run.productive,
            dist_sq_to_opt: x_star.as_ref().map(|s| dist2_sq(&x, s)),
        });
    }
    let bound = bounds::bound_as_count(total_bound(plan.omega, m));
    let mut report =
        StochasticReport::finish(instance, (!last_empty).then_some(x), total, productive, Some(bound), trace);
    report.stages = stages;
    report.empty_stages = empty_stages;
    report.mu_certified = Some(plan.mu_certified);
    Ok(report)
}

/// Restarted fixed-step stochastic method with expectation control.
///
/// Stage `p` runs `N_p = ⌈max{M_f², M_g²} Ω R_{p-1}²/ε_p²⌉` fixed steps of
/// size `ε_p/(M² R_{p-1}²)` with the prox-function `d((x - x_{p-1})/R_{p-1})`.
pub fn restarted_smd_expectation(
    instance: &ProblemInstance,
    config: &StochasticRunConfig,
    params: &RestartParams,
) -> Result<StochasticReport> {
    config.validate()?;
    let (mu, eps) = (params.mu, config.epsilon);
    let r0_sq = instance.r0_sq().unwrap_or(f64::NAN);
    restarted(instance, config, params, RestartKind::Expectation, |omega, m| {
        bounds::restart_bound(mu, r0_sq, eps, omega, m)
    })
}

/// Restarted fixed-step stochastic method with large-deviation control.
///
/// Stage `p` restricts the feasible set to `X ∩ {|x - x_{p-1}|² <= R_{p-1}²}`
/// and runs `N_p = ⌈70 max{M_f², M_g²} Ω R_{p-1}²/ε_p² · ln((1/σ) L)⌉` steps,
/// `L = log₂(μR₀²/(2ε))` (floored at 1). Entropy setups are unsupported.
pub fn restarted_smd_deviation(
    instance: &ProblemInstance,
    config: &StochasticRunConfig,
    params: &RestartParams,
) -> Result<StochasticReport> {
    config.validate()?;
    if instance.setup().is_entropy() {
        return Err(Error::Unsupported("deviation-controlled restarts need a Euclidean setup".into()));
    }
    let sigma = config.sigma()?;
    let (mu, eps) = (params.mu, config.epsilon);
    let r0_sq = instance.r0_sq().ok_or_else(|| Error::InvalidArgument("restarts need x0 and r0_sq".into()))?;
    let log_factor = bounds::deviation_log_factor(sigma, bounds::restart_horizon(mu, r0_sq, eps));
    restarted(instance, config, params, RestartKind::Deviation { log_factor }, |omega, m| {
        bounds::restart_deviation_bound(mu, r0_sq, eps, omega, m, sigma)
    })
}
