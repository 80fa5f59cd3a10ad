use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::oracles::grid_optimum;
use crate::error::{Error, Result};
use crate::linalg::sub;
use crate::problem::{ProblemInstance, StochasticGradient};
use crate::prox::NormKind;
use crate::rng::Rng;
use crate::stoch::{fixed_smd, StochasticRunConfig};

/// Smallest sample size accepted by [`unbiasedness_test`].
pub const MIN_UNBIASEDNESS_SAMPLES: usize = 10_000;

/// Grid resolution used when an instance carries no known optimum.
pub const DEVIATION_GRID_RESOLUTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnbiasednessOutcome {
    /// Dual norm of `mean(samples) - truth`.
    pub max_dev: f64,
    /// `5·M/√n`.
    pub threshold: f64,
    pub pass: bool,
}

/// Compares the empirical mean of `n` oracle draws at `x` with `truth`.
pub fn unbiasedness_test(
    oracle: &dyn StochasticGradient,
    truth: &[f64],
    x: &[f64],
    n: usize,
    norm: NormKind,
    rng: &mut Rng,
) -> Result<UnbiasednessOutcome> {
    if n < MIN_UNBIASEDNESS_SAMPLES {
        return Err(Error::InvalidArgument(format!("unbiasedness test needs at least {MIN_UNBIASEDNESS_SAMPLES} samples")));
    }
    let mut sum = vec![0.0; truth.len()];
    for _ in 0..n {
        let s = oracle.sample(x, rng)?;
        crate::error::check_dim(truth.len(), s.len())?;
        for (a, v) in sum.iter_mut().zip(&s) {
            *a += v;
        }
    }
    let mean: Vec<f64> = sum.iter().map(|v| v / n as f64).collect();
    let max_dev = norm.dual_norm(&sub(&mean, truth));
    let threshold = 5.0 * oracle.bound() / (n as f64).sqrt();
    Ok(UnbiasednessOutcome { max_dev, threshold, pass: max_dev <= threshold })
}

/// Negative control: shifts every draw of `inner` by a constant vector.
pub struct BiasedOracle<'a> {
    inner: &'a dyn StochasticGradient,
    offset: Vec<f64>,
}

impl<'a> BiasedOracle<'a> {
    /// Offset of dual norm `size` along the first coordinate.
    pub fn new(inner: &'a dyn StochasticGradient, dim: usize, size: f64) -> Self {
        let mut offset = vec![0.0; dim];
        offset[0] = size;
        Self { inner, offset }
    }

    /// The offset `10·M/√n` that the test at `n` samples must detect.
    pub fn detectable(inner: &'a dyn StochasticGradient, dim: usize, n: usize) -> Self {
        Self::new(inner, dim, 10.0 * inner.bound() / (n as f64).sqrt())
    }
}

impl StochasticGradient for BiasedOracle<'_> {
    fn sample(&self, x: &[f64], rng: &mut Rng) -> Result<Vec<f64>> {
        let mut s = self.inner.sample(x, rng)?;
        for (v, o) in s.iter_mut().zip(&self.offset) {
            *v += o;
        }
        Ok(s)
    }

    fn bound(&self) -> f64 {
        self.inner.bound()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationExperiment {
    pub n_seeds: u64,
    pub failures: u64,
    pub empty_outputs: u64,
    pub sigma_target: f64,
    /// Reference value the gaps were measured against. For a grid oracle
    /// this is the grid value minus its Lipschitz slack.
    pub f_star: f64,
}

impl DeviationExperiment {
    pub fn failure_rate(&self) -> f64 {
        self.failures as f64 / self.n_seeds as f64
    }

    /// `σ + 3√(σ(1-σ)/n)`.
    pub fn acceptance_band(&self) -> f64 {
        binomial_band(self.sigma_target, self.n_seeds)
    }

    pub fn passed(&self) -> bool {
        self.failure_rate() <= self.acceptance_band()
    }
}

pub fn binomial_band(p: f64, n: u64) -> f64 {
    p + 3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

/// Lower estimate of `f*`: the known optimum, or the grid value minus `L·r·√n`.
pub fn reference_optimum(instance: &ProblemInstance) -> Result<f64> {
    if let Some(opt) = instance.known_optimum() {
        return Ok(opt.f_star);
    }
    let r = DEVIATION_GRID_RESOLUTION;
    let grid = grid_optimum(instance, r)?;
    Ok(grid.f_star - instance.objective().lipschitz() * r * (instance.dim() as f64).sqrt())
}

/// Runs the fixed-step method on replicates `0..n_seeds` of `config.seed`
/// and counts runs that are not `(f - f* <= ε and g <= ε)`, empty output
/// included.
pub fn deviation_experiment(
    instance: &ProblemInstance,
    config: &StochasticRunConfig,
    n_seeds: u64,
) -> Result<DeviationExperiment> {
    let sigma = config.sigma.ok_or_else(|| Error::InvalidArgument("deviation experiment needs sigma".into()))?;
    if n_seeds == 0 {
        return Err(Error::InvalidArgument("n_seeds must be positive".into()));
    }
    let f_star = reference_optimum(instance)?;
    let eps = config.epsilon;
    let outcomes: Vec<(bool, bool)> = (0..n_seeds)
        .into_par_iter()
        .map(|i| {
            let r = fixed_smd(instance, &config.clone().with_replicate(i), None)?;
            let ok = match (r.f_bar, r.g_bar) {
                (Some(f), Some(g)) => f - f_star <= eps && g <= eps,
                _ => false,
            };
            Ok((ok, r.empty_output))
        })
        .collect::<Result<_>>()?;
    Ok(DeviationExperiment {
        n_seeds,
        failures: outcomes.iter().filter(|o| !o.0).count() as u64,
        empty_outputs: outcomes.iter().filter(|o| o.1).count() as u64,
        sigma_target: sigma,
        f_star,
    })
}

/// Sample mean and (n-1)-normalized standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
