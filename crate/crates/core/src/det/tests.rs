use super::*;
use crate::linalg::{axpy, dist2_sq, scale, Matrix};
use crate::problem::{
    make_linear_max_problem, make_quadratic_simplex_problem, OracleResult, PointwiseMax, ProblemInstance, Quadratic,
};
use crate::prox::{FeasibleSet, ProximalSetup};
use crate::Error;

fn p1() -> ProblemInstance {
    make_linear_max_problem(vec![1.0, 0.0], vec![vec![-1.0, 0.0]], vec![0.4], ProximalSetup::entropy(2).unwrap()).unwrap()
}

fn ball_quadratic(x0: Vec<f64>, r0_sq: f64) -> ProblemInstance {
    let set = FeasibleSet::unit_box(2);
    let setup = ProximalSetup::euclidean(set, None).unwrap();
    let f = PointwiseMax::single(Quadratic::new(Matrix::identity(2).scaled(2.0), vec![0.0, 0.0], 0.0).unwrap());
    let g = PointwiseMax::new(vec![Quadratic::affine(vec![-1.0, 0.0], 0.5), Quadratic::affine(vec![0.0, -1.0], 0.5)])
        .unwrap();
    ProblemInstance::builder(setup, f, g)
        .mu(2.0, 0.0)
        .start(x0, r0_sq)
        .known_optimum(OracleResult::analytic(0.5, vec![0.5, 0.5]))
        .build()
        .unwrap()
}

#[test]
fn p1_adaptive_md() {
    let p = p1();
    let r = adaptive_md(&p, &SolverConfig::new(0.05).with_trace().with_dual().with_audit()).unwrap();
    assert_eq!(r.theoretical_bound, Some(555));
    assert!(r.iterations <= 555 && r.within_bound);
    assert!(r.f_bar <= 0.45 + 1e-9);
    assert!(r.g_bar <= 0.05);
    assert_eq!(r.guarantee, Guarantee::EpsSolution);
    assert_eq!(r.audit_violations, 0);
    let dual = r.dual.as_ref().unwrap();
    assert!(dual.lambda_bar[0] >= 0.0);
    let phi = dual.phi_value.unwrap();
    assert!(phi <= 0.4 + 1e-12);
    assert!(r.f_bar - phi <= 0.05);
}

#[test]
fn averaging_and_multipliers_reconstruct_from_trace() {
    let p = p1();
    let r = adaptive_md(&p, &SolverConfig::new(0.05).with_trace().with_dual()).unwrap();
    let trace = r.trace.as_ref().unwrap();
    assert_eq!(trace.len() as u64, r.iterations);
    let mut sum = vec![0.0; 2];
    let mut w = 0.0;
    let mut nonprod = 0.0;
    for rec in &trace.records {
        assert_eq!(rec.step_kind == StepKind::Productive, rec.g_val <= 0.05);
        match rec.step_kind {
            StepKind::Productive => {
                axpy(&mut sum, rec.h_k, &rec.x);
                w += rec.h_k;
            }
            StepKind::Nonproductive => nonprod += rec.h_k,
        }
    }
    let x_bar = scale(&sum, 1.0 / w);
    assert!(dist2_sq(&x_bar, &r.x_bar).sqrt() <= 1e-12);
    assert!((nonprod / w - r.dual.unwrap().lambda_bar[0]).abs() <= 1e-12);
}

#[test]
fn zero_objective_returns_prox_center() {
    let p = make_linear_max_problem(vec![0.0, 0.0, 0.0], vec![vec![0.0; 3]], vec![-1.0], ProximalSetup::entropy(3).unwrap())
        .unwrap();
    let r = adaptive_md(&p, &SolverConfig::new(0.1)).unwrap();
    assert_eq!(r.iterations, 1);
    assert_eq!(r.productive_count, 1);
    assert_eq!(r.x_bar, vec![1.0 / 3.0; 3]);
    assert_eq!(r.guarantee, Guarantee::EpsSolution);
}

#[test]
fn guard_exhaustion_and_bad_guard() {
    let p = p1();
    assert!(adaptive_md(&p, &SolverConfig::new(0.05).with_guard(10)).is_err());
    let e = ProblemInstance::builder(
        ProximalSetup::euclidean(FeasibleSet::unit_box(2), None).unwrap(),
        PointwiseMax::single(Quadratic::affine(vec![1.0, 1.0], 0.0)),
        PointwiseMax::single(Quadratic::affine(vec![1.0, 1.0], -0.5)),
    )
    .build()
    .unwrap();
    // Dual recovery needs theta0_sq >= max d; shrink it below.
    let tight = ProblemInstance::builder(
        e.setup().clone(),
        e.objective().function().clone(),
        e.constraint().function().clone(),
    )
    .theta0_sq(0.1)
    .build()
    .unwrap();
    assert!(matches!(adaptive_md(&tight, &SolverConfig::new(0.1).with_dual()), Err(Error::Unsupported(_))));
}

#[test]
fn restart_reaches_the_ball_around_the_optimum() {
    let p = ball_quadratic(vec![1.0, 1.0], 4.0);
    let eps = 0.01;
    let r = restarted_md(&p, &SolverConfig::new(eps).with_audit(), &RestartParams::new(1.0)).unwrap();
    assert_eq!(r.stages.len(), 8);
    assert!(r.within_bound);
    assert!(r.stages.iter().all(|s| s.contraction_holds()));
    assert!(dist2_sq(&r.x_bar, &[0.5, 0.5]) <= 2.0 * eps + 1e-9);
    assert!(r.g_bar <= eps);
    assert!(r.f_bar - 0.5 <= eps);
    assert_eq!(r.audit_violations, 0);
    assert_eq!(r.mu_certified, Some(false));
}

#[test]
fn loose_accuracy_uses_one_stage() {
    let p = ball_quadratic(vec![1.0, 1.0], 4.0);
    let r = restarted_md(&p, &SolverConfig::new(5.0), &RestartParams::new(1.0)).unwrap();
    assert_eq!(r.stages.len(), 1);
    assert!(r.stages[0].epsilon_p <= 5.0);
}

#[test]
fn restart_preconditions() {
    let p = ball_quadratic(vec![1.0, 1.0], 4.0);
    assert!(restarted_md(&p, &SolverConfig::new(0.1), &RestartParams::new(0.0)).is_err());
    assert!(restarted_md(&p1(), &SolverConfig::new(0.1), &RestartParams::new(1.0)).is_err());
    let no_start = ProblemInstance::builder(
        p.setup().clone(),
        p.objective().function().clone(),
        p.constraint().function().clone(),
    )
    .build()
    .unwrap();
    assert!(restarted_md(&no_start, &SolverConfig::new(0.1), &RestartParams::new(1.0)).is_err());
}

#[test]
fn general_md_on_quadratic_simplex() {
    let setup = ProximalSetup::entropy(2).unwrap();
    let p = make_quadratic_simplex_problem(Matrix::identity(2), vec![vec![0.0, 0.0]], setup);
    // g ≡ 0 has no Slater point; use the constant -1 constraint instead.
    assert!(p.is_err());
    let f = PointwiseMax::single(Quadratic::new(Matrix::identity(2), vec![0.0, 0.0], 0.0).unwrap());
    let g = PointwiseMax::single(Quadratic::affine(vec![0.0, 0.0], -1.0));
    let p = ProblemInstance::builder(ProximalSetup::entropy(2).unwrap(), f, g)
        .known_optimum(OracleResult::analytic(0.25, vec![0.5, 0.5]))
        .build()
        .unwrap();
    let r = general_md(&p, &SolverConfig::new(0.01).with_audit()).unwrap();
    assert_eq!(r.eps_tilde, Some(0.01));
    assert_eq!(r.guarantee, Guarantee::EpsTildeSolution);
    assert!(r.g_bar <= 0.01);
    assert!(r.f_bar - 0.25 <= 0.01);
    assert!(r.within_bound);
    assert_eq!(r.audit_violations, 0);
}

#[test]
fn general_md_bound_and_empty_productive_set() {
    assert_eq!(crate::bounds::general_md_bound(1.0, 1.0, 0.1), 200);
    assert!((eps_tilde(0.01, 0.5, 1.0) - 0.01).abs() < 1e-18);
    // Θ₀² far below d(x*): the stopping rule fires before any productive step.
    let setup = ProximalSetup::euclidean(FeasibleSet::unit_box(1), None).unwrap();
    let f = PointwiseMax::single(Quadratic::affine(vec![1.0], 0.0));
    let g = PointwiseMax::single(Quadratic::affine(vec![-1.0], 0.9));
    let p = ProblemInstance::builder(setup, f, g).theta0_sq(1e-8).build().unwrap();
    assert!(matches!(general_md(&p, &SolverConfig::new(0.1)), Err(Error::NoProductiveSteps { iterations: 1 })));
    assert!(matches!(adaptive_md(&p, &SolverConfig::new(0.1)), Err(Error::NoProductiveSteps { iterations: 1 })));
}
