//! Brute-force and exact reference optima for small instances.

use switchmd::problem::make_linear_max_problem;
use switchmd::prox::{FeasibleSet, Geometry, ProximalSetup};
use switchmd::verify::{grid_optimum, vertex_optimum};

fn main() -> switchmd::Result<()> {
    let setup = ProximalSetup::euclidean(FeasibleSet::simplex(3), None)?;
    let p = make_linear_max_problem(
        vec![0.5, -0.3, 0.2],
        vec![vec![0.2, 1.0, -0.5], vec![-1.0, 0.3, 0.3]],
        vec![-0.3, 0.1],
        setup,
    )?;
    let exact = vertex_optimum(p.objective().function(), p.constraint().function(), p.setup().set())?;
    println!("vertex enumeration: f* = {:.6} at {:?}", exact.f_star, exact.x_star);
    for r in [1e-2, 5e-3, 1e-3] {
        let g = grid_optimum(&p, r)?;
        println!("grid {r:e}: f* = {:.6} at {:?}", g.f_star, g.x_star);
    }
    Ok(())
}
