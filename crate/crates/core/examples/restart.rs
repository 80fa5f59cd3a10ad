//! Radius-halving restarts on f(x) = |x|^2 over the unit box with
//! x_i >= 0.5, whose minimizer is (0.5, 0.5).

use switchmd::det::{restarted_md, RestartParams, SolverConfig};
use switchmd::linalg::Matrix;
use switchmd::problem::{OracleResult, PointwiseMax, ProblemInstance, Quadratic};
use switchmd::prox::{FeasibleSet, ProximalSetup};

fn main() -> switchmd::Result<()> {
    let setup = ProximalSetup::euclidean(FeasibleSet::unit_box(2), None)?;
    let f = PointwiseMax::single(Quadratic::new(Matrix::identity(2).scaled(2.0), vec![0.0, 0.0], 0.0)?);
    let g = PointwiseMax::new(vec![Quadratic::affine(vec![-1.0, 0.0], 0.5), Quadratic::affine(vec![0.0, -1.0], 0.5)])?;
    let p = ProblemInstance::builder(setup, f, g)
        .mu(2.0, 0.0)
        .start(vec![1.0, 1.0], 4.0)
        .known_optimum(OracleResult::analytic(0.5, vec![0.5, 0.5]))
        .build()?;
    let r = restarted_md(&p, &SolverConfig::new(0.01), &RestartParams::new(1.0))?;
    for s in &r.stages {
        println!(
            "stage {}: eps_p {:.5}, R_p^2 {:.5}, |x_p - x*|^2 {:.3e}, {} iterations",
            s.p,
            s.epsilon_p,
            s.radius_sq,
            s.dist_sq_to_opt.unwrap(),
            s.iterations
        );
    }
    println!("total {} iterations, bound {:?}", r.iterations, r.theoretical_bound);
    println!("mu certified for both functions: {:?}", r.mu_certified);
    Ok(())
}
