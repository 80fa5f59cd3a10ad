use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SolverName};
use crate::det::{
    adaptive_md, general_md, restarted_md, Guarantee, RestartParams, RunTrace, SolveReport, SolverConfig,
    StageSummary,
};
use crate::error::{Error, Result};
use crate::stoch::{
    adaptive_smd, fixed_smd, restarted_smd_deviation, restarted_smd_expectation, StochasticReport,
    StochasticRunConfig,
};
use crate::verify::{binomial_band, mean_std, reference_optimum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportGuarantee {
    EpsSolution,
    EpsTildeSolution,
    /// Objective gap bounded in expectation; checked statistically only.
    ExpectedEpsSolution,
    /// Objective gap bounded with probability `1 - σ`; checked statistically only.
    EpsSigmaSolution,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualReport {
    pub lambda: Vec<f64>,
    pub phi: Option<f64>,
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub replicate: u64,
    pub iterations: u64,
    pub productive_count: u64,
    pub f_bar: Option<f64>,
    pub g_bar: Option<f64>,
    pub theoretical_bound: Option<u64>,
    pub within_bound: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<DualReport>,
    pub guarantee: ReportGuarantee,
    /// Iteration bound exceeded or `g(x̄) > ε`.
    pub guarantee_violated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_tilde: Option<f64>,
    pub empty_output: bool,
    pub x_bar: Option<Vec<f64>>,
    pub stages: Vec<StageSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_certified: Option<bool>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn from_det(config: &ExperimentConfig, r: SolveReport) -> (RunReport, Option<RunTrace>) {
    let eps = config.params.epsilon;
    let gap = r.duality_gap();
    let guarantee = match r.guarantee {
        Guarantee::EpsSolution => ReportGuarantee::EpsSolution,
        Guarantee::EpsTildeSolution => ReportGuarantee::EpsTildeSolution,
        Guarantee::None => ReportGuarantee::None,
    };
    let report = RunReport {
        config: config.clone(),
        replicate: 0,
        iterations: r.iterations,
        productive_count: r.productive_count,
        f_bar: Some(r.f_bar),
        g_bar: Some(r.g_bar),
        theoretical_bound: r.theoretical_bound,
        within_bound: r.within_bound,
        dual: r.dual.map(|d| DualReport { lambda: d.lambda_bar, phi: d.phi_value, gap }),
        guarantee,
        guarantee_violated: !r.within_bound || r.g_bar > eps,
        eps_tilde: r.eps_tilde,
        empty_output: false,
        x_bar: Some(r.x_bar),
        stages: r.stages,
        mu_certified: r.mu_certified,
    };
    (report, r.trace)
}

fn from_stoch(config: &ExperimentConfig, replicate: u64, r: StochasticReport) -> (RunReport, Option<RunTrace>) {
    let eps = config.params.epsilon;
    let guarantee = match config.solver {
        SolverName::AdaptiveSmd | SolverName::RestartedSmdExpectation => ReportGuarantee::ExpectedEpsSolution,
        _ => ReportGuarantee::EpsSigmaSolution,
    };
    let report = RunReport {
        config: config.clone(),
        replicate,
        iterations: r.iterations,
        productive_count: r.productive_count,
        f_bar: r.f_bar,
        g_bar: r.g_bar,
        theoretical_bound: r.theoretical_bound,
        within_bound: r.within_bound,
        dual: None,
        guarantee,
        guarantee_violated: !r.within_bound || r.g_bar.is_some_and(|g| g > eps),
        eps_tilde: None,
        empty_output: r.empty_output,
        x_bar: r.x_bar,
        stages: r.stages,
        mu_certified: r.mu_certified,
    };
    (report, r.trace)
}

fn restart_params(config: &ExperimentConfig) -> Result<RestartParams> {
    let mu = config
        .params
        .mu
        .ok_or_else(|| Error::Config("restart solvers need `params.mu`".into()))?;
    Ok(RestartParams { mu, omega: config.params.omega })
}

/// Runs replicate `replicate` of the configured experiment in memory.
pub fn execute(config: &ExperimentConfig, replicate: u64, trace: bool) -> Result<(RunReport, Option<RunTrace>)> {
    let instance = config.instance.build()?;
    let p = &config.params;
    if config.solver.is_stochastic() {
        if p.recover_dual {
            return Err(Error::Config("dual recovery applies to deterministic solvers only".into()));
        }
        let mut sc = StochasticRunConfig::new(p.epsilon, config.seed).with_replicate(replicate);
        sc.sigma = p.sigma;
        sc.fixed_n = p.n;
        sc.record_trace = trace;
        let r = match config.solver {
            SolverName::AdaptiveSmd => adaptive_smd(&instance, &sc)?,
            SolverName::FixedSmd => fixed_smd(&instance, &sc, None)?,
            SolverName::RestartedSmdExpectation => restarted_smd_expectation(&instance, &sc, &restart_params(config)?)?,
            _ => restarted_smd_deviation(&instance, &sc, &restart_params(config)?)?,
        };
        return Ok(from_stoch(config, replicate, r));
    }
    if p.sigma.is_some() || p.n.is_some() {
        return Err(Error::Config("`sigma` and `n` apply to stochastic solvers only".into()));
    }
    let mut dc = SolverConfig::new(p.epsilon);
    dc.record_trace = trace;
    dc.recover_dual = p.recover_dual;
    dc.max_iterations_guard = p.max_iterations_guard;
    let r = match config.solver {
        SolverName::AdaptiveMd => adaptive_md(&instance, &dc)?,
        SolverName::GeneralMd => general_md(&instance, &dc)?,
        _ => restarted_md(&instance, &dc, &restart_params(config)?)?,
    };
    Ok(from_det(config, r))
}

/// Command-line overrides shared by `run` and `sweep`.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub trace: bool,
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.display().to_string(), message: e.to_string() })?;
    }
    fs::write(path, contents).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })
}

fn resolve(config: &ExperimentConfig, options: &RunOptions) -> (ExperimentConfig, bool) {
    let mut c = config.clone();
    if let Some(s) = options.seed {
        c.seed = s;
    }
    let trace = options.trace || c.outputs.trace.is_some();
    (c, trace)
}

fn persist(dir: &Path, config: &ExperimentConfig, report: &RunReport, trace: Option<&RunTrace>) -> Result<()> {
    let name = config.outputs.report.as_deref().unwrap_or("report.json");
    write(&dir.join(name), &report.to_json())?;
    if let Some(t) = trace {
        let name = config.outputs.trace.as_deref().unwrap_or("trace.csv");
        write(&dir.join(name), &t.to_csv())?;
    }
    Ok(())
}

/// Runs once and writes the report (and the trace when requested) into
/// `options.out_dir`.
pub fn run(config: &ExperimentConfig, options: &RunOptions) -> Result<RunReport> {
    let (config, trace) = resolve(config, options);
    let (report, t) = execute(&config, 0, trace)?;
    persist(&options.out_dir, &config, &report, t.as_ref())?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAggregate {
    pub config: ExperimentConfig,
    pub n_seeds: u64,
    /// Reference `f*` the gaps are measured against, when one is available.
    pub f_star: Option<f64>,
    /// Runs that are not `(f - f* <= ε and g <= ε)`; empty output counts as failure.
    pub failures: Option<u64>,
    pub failure_rate: Option<f64>,
    /// `σ + 3√(σ(1-σ)/n)` for the large-deviation solvers.
    pub failure_band: Option<f64>,
    pub empty_outputs: u64,
    pub mean_f_gap: Option<f64>,
    pub std_f_gap: Option<f64>,
    pub max_iterations: u64,
    pub all_within_bound: bool,
    pub guarantee_violations: u64,
    pub passed: bool,
}

/// Runs replicates `0..n_seeds` in parallel, writing
/// `replicate_<i>/` directories and `aggregate.json`.
pub fn sweep(config: &ExperimentConfig, options: &RunOptions) -> Result<SweepAggregate> {
    let (config, trace) = resolve(config, options);
    let n_seeds = config.n_seeds.ok_or_else(|| Error::Config("sweep needs `n_seeds`".into()))?;
    if n_seeds == 0 {
        return Err(Error::Config("`n_seeds` must be positive".into()));
    }
    let instance = config.instance.build()?;
    let f_star = reference_optimum(&instance).ok();
    let reports: Vec<RunReport> = (0..n_seeds)
        .into_par_iter()
        .map(|i| {
            let (report, t) = execute(&config, i, trace)?;
            persist(&options.out_dir.join(format!("replicate_{i}")), &config, &report, t.as_ref())?;
            Ok(report)
        })
        .collect::<Result<_>>()?;
    let eps = config.params.epsilon;
    let gaps: Option<Vec<f64>> =
        f_star.map(|fs| reports.iter().filter_map(|r| r.f_bar).map(|f| f - fs).collect());
    let failures = f_star.map(|fs| {
        reports
            .iter()
            .filter(|r| !matches!((r.f_bar, r.g_bar), (Some(f), Some(g)) if f - fs <= eps && g <= eps))
            .count() as u64
    });
    let failure_rate = failures.map(|f| f as f64 / n_seeds as f64);
    let failure_band = match (config.solver, config.params.sigma) {
        (SolverName::FixedSmd | SolverName::RestartedSmdDeviation, Some(s)) => Some(binomial_band(s, n_seeds)),
        _ => None,
    };
    let (mean_f_gap, std_f_gap) = match gaps.as_deref() {
        Some(g) if !g.is_empty() => {
            let (m, s) = mean_std(g);
            (Some(m), Some(s))
        }
        _ => (None, None),
    };
    let guarantee_violations = reports.iter().filter(|r| r.guarantee_violated).count() as u64;
    let band_ok = match (failure_rate, failure_band) {
        (Some(r), Some(b)) => r <= b,
        _ => true,
    };
    let aggregate = SweepAggregate {
        n_seeds,
        f_star,
        failures,
        failure_rate,
        failure_band,
        empty_outputs: reports.iter().filter(|r| r.empty_output).count() as u64,
        mean_f_gap,
        std_f_gap,
        max_iterations: reports.iter().map(|r| r.iterations).max().unwrap_or(0),
        all_within_bound: reports.iter().all(|r| r.within_bound),
        guarantee_violations,
        passed: guarantee_violations == 0 && band_ok,
        config,
    };
    write(
        &options.out_dir.join("aggregate.json"),
        &serde_json::to_string_pretty(&aggregate).expect("aggregate serializes"),
    )?;
    Ok(aggregate)
}
