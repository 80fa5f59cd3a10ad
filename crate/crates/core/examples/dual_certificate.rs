//! Minimize x1 on the 2-simplex subject to 0.4 - x1 <= 0 with the entropy
//! setup, then read off the Lagrange multiplier estimate.

use switchmd::det::{adaptive_md, SolverConfig};
use switchmd::problem::make_linear_max_problem;
use switchmd::prox::ProximalSetup;

fn main() -> switchmd::Result<()> {
    let p = make_linear_max_problem(vec![1.0, 0.0], vec![vec![-1.0, 0.0]], vec![0.4], ProximalSetup::entropy(2)?)?;
    let r = adaptive_md(&p, &SolverConfig::new(0.05).with_dual().with_trace())?;
    println!("x_bar = {:?}", r.x_bar);
    println!("f = {:.6}, g = {:.6}", r.f_bar, r.g_bar);
    println!("iterations {} of at most {}", r.iterations, r.theoretical_bound.unwrap());
    let dual = r.dual.as_ref().unwrap();
    println!("lambda = {:?}, phi = {:?}, gap = {:?}", dual.lambda_bar, dual.phi_value, r.duality_gap());
    let csv = r.trace.unwrap().to_csv();
    for line in csv.lines().take(4) {
        println!("{line}");
    }
    Ok(())
}
