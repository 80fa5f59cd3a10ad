//! Restarted stochastic methods on a strongly convex problem with noisy
//! gradients.

use switchmd::det::RestartParams;
use switchmd::linalg::{dist2_sq, Matrix};
use switchmd::problem::{OracleResult, OracleSpec, PointwiseMax, ProblemInstance, Quadratic};
use switchmd::prox::{FeasibleSet, ProximalSetup};
use switchmd::stoch::{restarted_smd_deviation, restarted_smd_expectation, StochasticRunConfig};

fn main() -> switchmd::Result<()> {
    let set = FeasibleSet::Box { lower: vec![-1.0, -1.0], upper: vec![1.0, 1.0] };
    let f = PointwiseMax::single(Quadratic::new(Matrix::identity(2).scaled(2.0), vec![-0.6, 0.4], 0.13)?);
    let g = PointwiseMax::single(Quadratic::new(Matrix::identity(2).scaled(2.0), vec![0.0, 0.0], -1.0)?);
    let x_star = vec![0.3, -0.2];
    let p = ProblemInstance::builder(ProximalSetup::euclidean(set, None)?, f, g)
        .mu(2.0, 2.0)
        .start(vec![-1.0, 1.0], 3.5)
        .known_optimum(OracleResult::analytic(0.0, x_star.clone()))
        .stochastic_objective(OracleSpec::UniformNoise { amplitude: 0.5 })
        .stochastic_constraint(OracleSpec::Exact)
        .build()?;
    let cfg = StochasticRunConfig::new(0.05, 1).with_sigma(0.1);
    let params = RestartParams::new(2.0);
    let e = restarted_smd_expectation(&p, &cfg, &params)?;
    let d = restarted_smd_deviation(&p, &cfg, &params)?;
    for (name, r) in [("expectation", e), ("deviation", d)] {
        println!(
            "{name}: {} stages, {} iterations, |x - x*|^2 = {:.3e}",
            r.stages.len(),
            r.iterations,
            dist2_sq(r.x_bar.as_ref().unwrap(), &x_star)
        );
    }
    Ok(())
}
