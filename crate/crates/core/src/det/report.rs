use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Settings shared by the deterministic methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub epsilon: f64,
    /// Safety cap on iterations; defaults to ten times the theoretical bound.
    #[serde(default)]
    pub max_iterations_guard: Option<u64>,
    #[serde(default)]
    pub record_trace: bool,
    #[serde(default)]
    pub recover_dual: bool,
    /// Check the one-step inequality at the known optimum on every step.
    #[serde(default)]
    pub audit_step_inequality: bool,
}

impl SolverConfig {
    pub fn new(epsilon: f64) -> Self {
        Self { epsilon, max_iterations_guard: None, record_trace: false, recover_dual: false, audit_step_inequality: false }
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }

    pub fn with_dual(mut self) -> Self {
        self.recover_dual = true;
        self
    }

    pub fn with_audit(mut self) -> Self {
        self.audit_step_inequality = true;
        self
    }

    pub fn with_guard(mut self, guard: u64) -> Self {
        self.max_iterations_guard = Some(guard);
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }

    /// The explicit guard (which must not undercut `bound`) or the default.
    pub(crate) fn guard(&self, bound: Option<u64>) -> Result<u64> {
        match (self.max_iterations_guard, bound) {
            (Some(g), Some(b)) if g < b => {
                Err(Error::InvalidArgument(format!("iteration guard {g} is below the theoretical bound {b}")))
            }
            (Some(g), _) => Ok(g),
            (None, Some(b)) => Ok(b.saturating_mul(10).max(1)),
            (None, None) => Ok(1_000_000),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Productive,
    Nonproductive,
}

impl StepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StepKind::Productive => "productive",
            StepKind::Nonproductive => "nonproductive",
        }
    }
}

/// One iteration: the iterate `x^k` and the step taken from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: u64,
    /// Restart stage (1-based), 0 outside restart schemes.
    pub stage: u32,
    pub step_kind: StepKind,
    pub m_k: f64,
    pub h_k: f64,
    pub f_val: f64,
    pub g_val: f64,
    /// Constraint part whose subgradient was used (0-based); `None` on
    /// productive steps.
    pub active_index: Option<usize>,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
}

impl RunTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn push(&mut self, r: TraceRecord) {
        self.records.push(r);
    }

    /// CSV with columns `iter,step_kind,M_k,h_k,f_val,g_val,active_index`;
    /// floats carry 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,step_kind,M_k,h_k,f_val,g_val,active_index\n");
        for r in &self.records {
            let active = r.active_index.map(|i| i.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                r.k,
                r.step_kind.as_str(),
                r.m_k,
                r.h_k,
                r.f_val,
                r.g_val,
                active
            )
            .expect("writing to a String cannot fail");
        }
        out
    }
}

/// Approximate Lagrange multipliers built from non-productive stepsizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub lambda_bar: Vec<f64>,
    /// Dual function value `φ(λ̄)`, when the instance class supports it.
    pub phi_value: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Guarantee {
    EpsSolution,
    EpsTildeSolution,
    None,
}

/// One outer iteration of a restart scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub p: u32,
    pub epsilon_p: f64,
    /// `R_p²`, the squared radius promised after this stage.
    pub radius_sq: f64,
    pub iterations: u64,
    pub productive_count: u64,
    /// `|x_p - x*|²` when the optimum is known.
    pub dist_sq_to_opt: Option<f64>,
}

impl StageSummary {
    /// Whether the audited distance respects `R_p²` (vacuous without `x*`).
    pub fn contraction_holds(&self) -> bool {
        self.dist_sq_to_opt.is_none_or(|d| d <= self.radius_sq + 1e-9)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub x_bar: Vec<f64>,
    pub f_bar: f64,
    pub g_bar: f64,
    pub iterations: u64,
    pub productive_count: u64,
    pub theoretical_bound: Option<u64>,
    pub within_bound: bool,
    pub dual: Option<DualCertificate>,
    pub guarantee: Guarantee,
    /// Accuracy certified for smooth objectives by the general method.
    pub eps_tilde: Option<f64>,
    pub trace: Option<RunTrace>,
    pub stages: Vec<StageSummary>,
    /// Steps at which the audited one-step inequality failed.
    pub audit_violations: u64,
    /// For restarts: whether the declared moduli of `f` and `g` cover `μ`.
    pub mu_certified: Option<bool>,
}

impl SolveReport {
    /// Duality gap `f(x̄) - φ(λ̄)` when available.
    pub fn duality_gap(&self) -> Option<f64> {
        self.dual.as_ref().and_then(|d| d.phi_value).map(|phi| self.f_bar - phi)
    }
}
