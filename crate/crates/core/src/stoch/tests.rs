use super::*;
use crate::det::RestartParams;
use crate::linalg::{dist2_sq, Matrix};
use crate::problem::{
    make_linear_max_problem, make_quadratic_simplex_problem, OracleResult, OracleSpec, PointwiseMax, ProblemInstance,
    Quadratic,
};
use crate::prox::{FeasibleSet, ProximalSetup};
use crate::Error;

fn quadratic_simplex() -> ProblemInstance {
    let setup = ProximalSetup::euclidean(FeasibleSet::simplex(2), None).unwrap();
    make_quadratic_simplex_problem(Matrix::identity(2), vec![vec![-1.0, -1.0]], setup).unwrap()
}

fn exact_linear() -> ProblemInstance {
    let setup = ProximalSetup::euclidean(FeasibleSet::simplex(2), None).unwrap();
    let p = make_linear_max_problem(vec![1.0, 0.0], vec![vec![-1.0, 0.0]], vec![0.4], setup).unwrap();
    p.to_builder()
        .theta0_sq(1.0)
        .stochastic_objective(OracleSpec::Exact)
        .stochastic_constraint(OracleSpec::Exact)
        .build()
        .unwrap()
}

fn strongly_convex(spec: OracleSpec) -> ProblemInstance {
    let setup = ProximalSetup::euclidean(FeasibleSet::unit_box(2), None).unwrap();
    let f = PointwiseMax::single(Quadratic::new(Matrix::identity(2).scaled(2.0), vec![0.0, 0.0], 0.0).unwrap());
    let g = PointwiseMax::new(vec![Quadratic::affine(vec![-1.0, 0.0], 0.5), Quadratic::affine(vec![0.0, -1.0], 0.5)])
        .unwrap();
    ProblemInstance::builder(setup, f, g)
        .mu(2.0, 0.0)
        .start(vec![1.0, 1.0], 1.0)
        .known_optimum(OracleResult::analytic(0.5, vec![0.5, 0.5]))
        .stochastic_objective(spec)
        .stochastic_constraint(OracleSpec::Exact)
        .build()
        .unwrap()
}

#[test]
fn adaptive_smd_zero_noise() {
    let p = exact_linear();
    let r = adaptive_smd(&p, &StochasticRunConfig::new(0.05, 1)).unwrap();
    assert!(r.within_bound);
    assert!(!r.empty_output);
    assert!(r.g_bar.unwrap() <= 0.05);
    assert!(r.f_bar.unwrap() - 0.4 <= 0.05);
}

#[test]
fn adaptive_smd_on_column_sampling() {
    let p = quadratic_simplex();
    let gaps: Vec<f64> = (0..20)
        .map(|s| {
            let r = adaptive_smd(&p, &StochasticRunConfig::new(0.05, 11).with_replicate(s)).unwrap();
            assert!(r.within_bound);
            assert!(r.g_bar.unwrap() <= 0.05);
            r.f_bar.unwrap() - 0.25
        })
        .collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    assert!(mean <= 0.05, "mean gap {mean}");
}

#[test]
fn adaptive_smd_needs_bregman_bound_and_oracles() {
    let p = make_linear_max_problem(vec![1.0, 0.0], vec![vec![-1.0, 0.0]], vec![0.4], ProximalSetup::entropy(2).unwrap())
        .unwrap();
    assert!(matches!(adaptive_smd(&p, &StochasticRunConfig::new(0.1, 0)), Err(Error::InvalidArgument(_))));
    let q = p.to_builder().stochastic_objective(OracleSpec::Exact).stochastic_constraint(OracleSpec::Exact).build().unwrap();
    assert!(matches!(adaptive_smd(&q, &StochasticRunConfig::new(0.1, 0)), Err(Error::Unsupported(_))));
}

#[test]
fn fixed_smd_zero_noise_all_productive() {
    let p = quadratic_simplex().to_builder().stochastic_objective(OracleSpec::Exact).build().unwrap();
    let r = fixed_smd(&p, &StochasticRunConfig::new(0.1, 3).with_fixed_n(50), None).unwrap();
    assert_eq!(r.iterations, 50);
    assert_eq!(r.productive_count, 50);
    assert!(!r.empty_output);
}

#[test]
fn fixed_smd_default_n_and_sigma_range() {
    let p = exact_linear();
    let r = fixed_smd(&p, &StochasticRunConfig::new(0.5, 3).with_sigma(0.1), None).unwrap();
    assert_eq!(r.iterations, crate::bounds::fixed_smd_iterations(1.0, 1.0, 1.0, 0.5, 0.1));
    let e = fixed_smd(&p, &StochasticRunConfig::new(0.5, 3).with_sigma(0.7), None).unwrap_err();
    assert!(e.to_string().contains("sigma out of (0,0.5)"));
    assert!(fixed_smd(&p, &StochasticRunConfig::new(0.5, 3), None).is_err());
}

#[test]
fn fixed_smd_empty_output() {
    let p = exact_linear();
    // The prox center (0.5, 0.5) violates 0.4 - x1 <= ε for tiny ε only if
    // x1 < 0.4; start from a restricted set where that holds.
    let set = FeasibleSet::Box { lower: vec![0.0, 0.0], upper: vec![0.3, 1.0] };
    let r = fixed_smd(&p, &StochasticRunConfig::new(0.01, 3).with_fixed_n(1), Some(set)).unwrap();
    assert!(r.empty_output);
    assert!(r.x_bar.is_none() && r.f_bar.is_none());
}

#[test]
fn same_seed_same_trace() {
    let p = quadratic_simplex();
    let c = StochasticRunConfig::new(0.1, 42).with_trace();
    let a = adaptive_smd(&p, &c).unwrap();
    let b = adaptive_smd(&p, &c).unwrap();
    assert_eq!(a.trace.as_ref().unwrap().to_csv(), b.trace.as_ref().unwrap().to_csv());
    assert_eq!(a.x_bar, b.x_bar);
    let other = adaptive_smd(&p, &c.clone().with_replicate(1)).unwrap();
    assert_ne!(a.trace.unwrap().to_csv(), other.trace.unwrap().to_csv());
}

#[test]
fn restarted_expectation_zero_noise_contracts() {
    let p = strongly_convex(OracleSpec::Exact);
    let eps = 0.05;
    let r = restarted_smd_expectation(&p, &StochasticRunConfig::new(eps, 0), &RestartParams::new(1.0)).unwrap();
    assert!(r.within_bound);
    assert!(r.stages.iter().all(|s| s.contraction_holds()));
    assert!(dist2_sq(r.x_bar.as_ref().unwrap(), &[0.5, 0.5]) <= 2.0 * eps + 1e-9);
    assert_eq!(r.empty_stages, 0);
}

#[test]
fn restarted_deviation_zero_noise_contracts() {
    let p = strongly_convex(OracleSpec::Exact);
    let eps = 0.1;
    let c = StochasticRunConfig::new(eps, 0).with_sigma(0.1);
    let r = restarted_smd_deviation(&p, &c, &RestartParams::new(1.0)).unwrap();
    assert!(r.within_bound);
    assert!(r.stages.iter().all(|s| s.contraction_holds()));
    assert!(dist2_sq(r.x_bar.as_ref().unwrap(), &[0.5, 0.5]) <= 2.0 * eps + 1e-9);
}

#[test]
fn restarted_deviation_rejects_entropy() {
    let p = make_linear_max_problem(vec![1.0, 0.0], vec![vec![-1.0, 0.0]], vec![0.4], ProximalSetup::entropy(2).unwrap())
        .unwrap()
        .to_builder()
        .stochastic_objective(OracleSpec::Exact)
        .stochastic_constraint(OracleSpec::Exact)
        .build()
        .unwrap();
    let c = StochasticRunConfig::new(0.1, 0).with_sigma(0.1);
    assert!(matches!(restarted_smd_deviation(&p, &c, &RestartParams::new(1.0)), Err(Error::Unsupported(_))));
}
