//! Adaptive stochastic mirror descent on ½<Ax, x> over the simplex, where
//! each gradient is a column of A drawn with probabilities x.

use switchmd::linalg::Matrix;
use switchmd::problem::make_quadratic_simplex_problem;
use switchmd::prox::{FeasibleSet, ProximalSetup};
use switchmd::stoch::{adaptive_smd, StochasticRunConfig};

fn main() -> switchmd::Result<()> {
    let setup = ProximalSetup::euclidean(FeasibleSet::simplex(2), None)?;
    let p = make_quadratic_simplex_problem(Matrix::identity(2), vec![vec![-1.0, -1.0]], setup)?;
    let eps = 0.05;
    let mut total = 0.0;
    let seeds = 20;
    for s in 0..seeds {
        let r = adaptive_smd(&p, &StochasticRunConfig::new(eps, 7).with_replicate(s))?;
        let gap = r.f_bar.unwrap() - 0.25;
        total += gap;
        if s < 3 {
            println!("replicate {s}: {} iterations (bound {:?}), gap {gap:.3e}", r.iterations, r.theoretical_bound);
        }
    }
    println!("mean gap over {seeds} replicates: {:.3e} (eps = {eps})", total / seeds as f64);
    Ok(())
}
