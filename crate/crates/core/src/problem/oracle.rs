use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::functions::PointwiseMax;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::prox::{FeasibleSet, NormKind};
use crate::rng::Rng;

/// Tolerance on simplex membership for column sampling.
pub const SIMPLEX_SAMPLE_TOL: f64 = 1e-9;

/// Unbiased stochastic subgradient with an almost-sure dual-norm bound.
pub trait StochasticGradient: Send + Sync {
    fn sample(&self, x: &[f64], rng: &mut Rng) -> Result<Vec<f64>>;
    /// Almost-sure bound on the dual norm of every sample.
    fn bound(&self) -> f64;
}

/// Which stochastic model to attach to a function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleSpec {
    /// Deterministic subgradient (zero noise).
    Exact,
    /// Column `A^{<ξ>}` with `ξ ~ Categorical(x)` for `½<Ax, x>` on the simplex.
    ColumnSampling,
    /// Subgradient plus independent `Uniform[-amplitude, amplitude]` noise per coordinate.
    UniformNoise { amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq)]
enum Model {
    Exact(PointwiseMax),
    Columns(Matrix),
    Noise { function: PointwiseMax, amplitude: f64 },
}

/// A stochastic subgradient oracle together with its bound in the dual norm
/// of the setup it was built for.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticOracle {
    model: Model,
    bound: f64,
    spec: OracleSpec,
}

impl StochasticOracle {
    pub fn build(spec: &OracleSpec, function: &PointwiseMax, set: &FeasibleSet, norm: NormKind) -> Result<Self> {
        let model = match spec {
            OracleSpec::Exact => Model::Exact(function.clone()),
            OracleSpec::ColumnSampling => {
                let [part] = function.parts() else {
                    return Err(Error::Unsupported("column sampling needs a single quadratic part".into()));
                };
                if !matches!(set, FeasibleSet::Simplex { .. }) {
                    return Err(Error::Unsupported("column sampling needs the simplex as feasible set".into()));
                }
                if part.linear.iter().any(|v| *v != 0.0) || part.constant != 0.0 {
                    return Err(Error::Unsupported("column sampling needs f(x) = ½<Ax, x>".into()));
                }
                Model::Columns(part.hessian.clone().unwrap_or_else(|| Matrix::zeros(part.dim())))
            }
            OracleSpec::UniformNoise { amplitude } => {
                if !(amplitude.is_finite() && *amplitude >= 0.0) {
                    return Err(Error::InvalidArgument(format!("noise amplitude must be >= 0, got {amplitude}")));
                }
                Model::Noise { function: function.clone(), amplitude: *amplitude }
            }
        };
        let bound = match &model {
            Model::Exact(f) => f.lipschitz_over(set, norm),
            Model::Columns(a) => (0..a.dim()).map(|j| norm.dual_norm(&a.column(j))).fold(0.0, f64::max),
            Model::Noise { function, amplitude } => {
                let n = function.dim();
                function.lipschitz_over(set, norm) + norm.dual_norm(&vec![*amplitude; n])
            }
        };
        Ok(Self { model, bound, spec: spec.clone() })
    }

    pub fn spec(&self) -> &OracleSpec {
        &self.spec
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.model, Model::Exact(_))
    }
}

impl StochasticGradient for StochasticOracle {
    fn sample(&self, x: &[f64], rng: &mut Rng) -> Result<Vec<f64>> {
        match &self.model {
            Model::Exact(f) => Ok(f.subgradient(x)),
            Model::Columns(a) => column_sample_gradient(a, x, rng),
            Model::Noise { function, amplitude } => {
                let mut g = function.subgradient(x);
                for v in &mut g {
                    *v += amplitude * (2.0 * rng.random::<f64>() - 1.0);
                }
                Ok(g)
            }
        }
    }

    fn bound(&self) -> f64 {
        self.bound
    }
}

/// Draws `ξ ~ Categorical(x)` and returns column `ξ` of `A`; its expectation is `Ax`.
/// `x` is renormalized onto the simplex first; components below
/// `-SIMPLEX_SAMPLE_TOL` or a sum off by more than that are rejected.
pub fn column_sample_gradient(a: &Matrix, x: &[f64], rng: &mut Rng) -> Result<Vec<f64>> {
    if x.len() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: x.len() });
    }
    if let Some(v) = x.iter().find(|v| !(v.is_finite() && **v >= -SIMPLEX_SAMPLE_TOL)) {
        return Err(Error::InvalidArgument(format!("column sampling needs a simplex point, found component {v}")));
    }
    let total: f64 = x.iter().map(|v| v.max(0.0)).sum();
    if (total - 1.0).abs() > SIMPLEX_SAMPLE_TOL {
        return Err(Error::InvalidArgument(format!("column sampling needs a simplex point, components sum to {total}")));
    }
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut pick = None;
    for (j, v) in x.iter().enumerate() {
        let w = v.max(0.0);
        if w > 0.0 {
            acc += w;
            pick = Some(j);
            if u < acc {
                break;
            }
        }
    }
    let j = pick.expect("simplex point has a positive component");
    Ok(a.column(j))
}
