//! Fixed-step stochastic mirror descent with a confidence level: count how
//! often 200 replicates miss an eps-solution, with f* from a grid.

use switchmd::bounds::fixed_smd_iterations;
use switchmd::linalg::Matrix;
use switchmd::problem::make_quadratic_simplex_problem;
use switchmd::prox::{FeasibleSet, ProximalSetup};
use switchmd::stoch::StochasticRunConfig;
use switchmd::verify::deviation_experiment;

fn main() -> switchmd::Result<()> {
    println!("N(M=1, Theta0=1, eps=0.1, sigma=0.1) = {}", fixed_smd_iterations(1.0, 1.0, 1.0, 0.1, 0.1));
    let setup = ProximalSetup::euclidean(FeasibleSet::simplex(2), None)?;
    let p = make_quadratic_simplex_problem(Matrix::diagonal(&[1.0, 2.0]), vec![vec![1.0, -1.0]], setup)?;
    let e = deviation_experiment(&p, &StochasticRunConfig::new(0.1, 8).with_sigma(0.1), 200)?;
    println!(
        "f* >= {:.4}; {} of {} replicates failed (rate {:.3}, band {:.3})",
        e.f_star,
        e.failures,
        e.n_seeds,
        e.failure_rate(),
        e.acceptance_band()
    );
    Ok(())
}
