//! The general method on f(x) = ½|x|^2 over the 2-simplex with a slack
//! constraint; the accuracy it certifies depends on the smoothness of f.

use switchmd::det::{general_md, SolverConfig};
use switchmd::linalg::Matrix;
use switchmd::problem::{OracleResult, PointwiseMax, ProblemInstance, Quadratic};
use switchmd::prox::{FeasibleSet, ProximalSetup};

fn main() -> switchmd::Result<()> {
    for setup in [ProximalSetup::entropy(2)?, ProximalSetup::euclidean(FeasibleSet::simplex(2), None)?] {
        let f = PointwiseMax::single(Quadratic::new(Matrix::identity(2), vec![0.0, 0.0], 0.0)?);
        let g = PointwiseMax::single(Quadratic::affine(vec![0.0, 0.0], -1.0));
        let p = ProblemInstance::builder(setup.clone(), f, g)
            .known_optimum(OracleResult::analytic(0.25, vec![0.5, 0.5]))
            .build()?;
        let r = general_md(&p, &SolverConfig::new(0.01))?;
        println!(
            "{:?}: f - f* = {:.3e}, certified eps~ = {:?}, guarantee {:?}",
            setup.norm_kind(),
            r.f_bar - 0.25,
            r.eps_tilde,
            r.guarantee
        );
    }
    Ok(())
}
