use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::problem::{
    make_linear_max_problem, make_quadratic_simplex_problem, OracleResult, OracleSpec, PointwiseMax, ProblemInstance,
    SmoothnessConstants,
};
use crate::prox::{FeasibleSet, ProximalSetup};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverName {
    AdaptiveMd,
    RestartedMd,
    GeneralMd,
    AdaptiveSmd,
    FixedSmd,
    RestartedSmdExpectation,
    RestartedSmdDeviation,
}

impl SolverName {
    pub fn is_stochastic(self) -> bool {
        matches!(
            self,
            Self::AdaptiveSmd | Self::FixedSmd | Self::RestartedSmdExpectation | Self::RestartedSmdDeviation
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    LinearMax,
    QuadraticSimplex,
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetupName {
    Euclidean,
    Entropy,
}

/// Problem description. Which fields are required depends on `kind`:
/// `linear_max` needs `c`, `constraints`, `offsets`; `quadratic_simplex`
/// needs `a`, `constraints`; `general` needs `objective`, `constraint`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDescription {
    pub kind: InstanceKind,
    pub setup: SetupName,
    /// Feasible set; defaults to the simplex of the problem dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<FeasibleSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prox_center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<PointwiseMax>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<PointwiseMax>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0_sq: Option<f64>,
    /// Declared strong-convexity moduli `[mu_f, mu_g]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0_sq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_optimum: Option<OracleResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothness: Option<SmoothnessConstants>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stochastic_objective: Option<OracleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stochastic_constraint: Option<OracleSpec>,
}

fn need<T: Clone>(field: &Option<T>, name: &str, kind: &str) -> Result<T> {
    field.clone().ok_or_else(|| Error::Config(format!("instance kind {kind} needs field `{name}`")))
}

fn forbid<T>(field: &Option<T>, name: &str, kind: &str) -> Result<()> {
    match field {
        Some(_) => Err(Error::Config(format!("field `{name}` does not apply to instance kind {kind}"))),
        None => Ok(()),
    }
}

impl InstanceDescription {
    fn dim(&self) -> Result<usize> {
        let n = match self.kind {
            InstanceKind::LinearMax => self.c.as_ref().map(Vec::len),
            InstanceKind::QuadraticSimplex => self.a.as_ref().map(Vec::len),
            InstanceKind::General => self.objective.as_ref().map(PointwiseMax::dim),
        };
        n.or_else(|| self.set.as_ref().map(FeasibleSet::dim))
            .ok_or_else(|| Error::Config("cannot infer the problem dimension".into()))
    }

    fn build_setup(&self) -> Result<ProximalSetup> {
        let n = self.dim()?;
        let set = self.set.clone().unwrap_or_else(|| FeasibleSet::simplex(n));
        match self.setup {
            SetupName::Euclidean => ProximalSetup::euclidean(set, self.prox_center.clone()),
            SetupName::Entropy => {
                forbid(&self.prox_center, "prox_center", "with the entropy setup")?;
                if set != FeasibleSet::simplex(n) {
                    return Err(Error::Config("the entropy setup needs the simplex as feasible set".into()));
                }
                ProximalSetup::entropy(n)
            }
        }
    }

    pub fn build(&self) -> Result<ProblemInstance> {
        let setup = self.build_setup()?;
        let base = match self.kind {
            InstanceKind::LinearMax => {
                let k = "linear_max";
                forbid(&self.a, "a", k)?;
                forbid(&self.objective, "objective", k)?;
                forbid(&self.constraint, "constraint", k)?;
                make_linear_max_problem(
                    need(&self.c, "c", k)?,
                    need(&self.constraints, "constraints", k)?,
                    need(&self.offsets, "offsets", k)?,
                    setup,
                )?
            }
            InstanceKind::QuadraticSimplex => {
                let k = "quadratic_simplex";
                forbid(&self.c, "c", k)?;
                forbid(&self.offsets, "offsets", k)?;
                forbid(&self.objective, "objective", k)?;
                forbid(&self.constraint, "constraint", k)?;
                let a = Matrix::from_rows(need(&self.a, "a", k)?)?;
                make_quadratic_simplex_problem(a, need(&self.constraints, "constraints", k)?, setup)?
            }
            InstanceKind::General => {
                let k = "general";
                forbid(&self.c, "c", k)?;
                forbid(&self.a, "a", k)?;
                forbid(&self.constraints, "constraints", k)?;
                forbid(&self.offsets, "offsets", k)?;
                ProblemInstance::builder(setup, need(&self.objective, "objective", k)?, need(&self.constraint, "constraint", k)?)
                    .build()?
            }
        };
        let mut b = base.to_builder();
        if let Some(t) = self.theta0_sq {
            b = b.theta0_sq(t);
        }
        if let Some([mf, mg]) = self.mu {
            b = b.mu(mf, mg);
        }
        match (&self.x0, self.r0_sq) {
            (Some(x0), Some(r)) => b = b.start(x0.clone(), r),
            (None, None) => {}
            _ => return Err(Error::Config("`x0` and `r0_sq` must be given together".into())),
        }
        if let Some(o) = &self.known_optimum {
            b = b.known_optimum(o.clone());
        }
        if let Some(s) = self.smoothness {
            b = b.smoothness(s);
        }
        if let Some(s) = &self.stochastic_objective {
            b = b.stochastic_objective(s.clone());
        }
        if let Some(s) = &self.stochastic_constraint {
            b = b.stochastic_constraint(s.clone());
        }
        b.build()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverParams {
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// Strong-convexity parameter used by the restart schemes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    /// Iteration count override for `fixed_smd`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default)]
    pub recover_dual: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations_guard: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    /// Trace file name inside the output directory; setting it enables tracing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub instance: InstanceDescription,
    pub solver: SolverName,
    pub params: SolverParams,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub outputs: Outputs,
    /// Replicates for `sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_seeds: Option<u64>,
}

impl ExperimentConfig {
    /// Parses and checks the schema version. Syntax errors carry the
    /// line and column reported by the parser.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P1: &str = r#"{
        "schema_version": 1,
        "instance": {"kind": "linear_max", "setup": "entropy", "c": [1, 0], "constraints": [[-1, 0]], "offsets": [0.4]},
        "solver": "adaptive_md",
        "params": {"epsilon": 0.05}
    }"#;

    #[test]
    fn parses_and_builds() {
        let c = ExperimentConfig::from_json(P1).unwrap();
        assert_eq!(c.solver, SolverName::AdaptiveMd);
        let p = c.instance.build().unwrap();
        assert_eq!(p.dim(), 2);
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn unknown_fields_and_versions_rejected() {
        let e = ExperimentConfig::from_json(&P1.replace("\"epsilon\"", "\"epsilon\": 0.1, \"eps\"")).unwrap_err();
        assert!(e.to_string().contains("unknown field `eps`"), "{e}");
        let e = ExperimentConfig::from_json(&P1.replace("\"schema_version\": 1", "\"schema_version\": 2")).unwrap_err();
        assert!(e.to_string().contains("schema_version 2"));
        let e = ExperimentConfig::from_json("{\n  \"schema_version\": 1,\n  oops").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
    }

    #[test]
    fn kind_specific_fields() {
        let c = ExperimentConfig::from_json(&P1.replace("\"offsets\": [0.4]", "\"offsets\": [0.4], \"a\": [[1]]")).unwrap();
        assert!(matches!(c.instance.build(), Err(Error::Config(_))));
        let c = ExperimentConfig::from_json(&P1.replace(", \"offsets\": [0.4]", "")).unwrap();
        assert!(c.instance.build().unwrap_err().to_string().contains("offsets"));
    }
}
