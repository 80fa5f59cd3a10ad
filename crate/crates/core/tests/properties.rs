use proptest::prelude::*;
use switchmd::bounds;
use switchmd::det::{adaptive_md, SolverConfig};
use switchmd::linalg::{dist2_sq, dot};
use switchmd::problem::{make_linear_max_problem, PointwiseMax, Quadratic};
use switchmd::prox::{project_simplex, FeasibleSet, Geometry, ProximalSetup};
use switchmd::verify::check_step_inequality;

fn simplex_point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

fn vector(n: usize, r: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-r..r, n)
}

fn setups(n: usize) -> Vec<ProximalSetup> {
    vec![
        ProximalSetup::euclidean(FeasibleSet::simplex(n), None).unwrap(),
        ProximalSetup::entropy(n).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn simplex_projection_is_nearest(y in vector(4, 3.0), v in simplex_point(4)) {
        let p = project_simplex(&y);
        prop_assert!(p.iter().all(|x| *x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(dist2_sq(&y, &p) <= dist2_sq(&y, &v) + 1e-12);
        let again = project_simplex(&p);
        prop_assert!(dist2_sq(&again, &p) < 1e-24);
    }

    #[test]
    fn bregman_is_nonnegative_and_zero_on_diagonal(z in simplex_point(3), x in simplex_point(3)) {
        for s in setups(3) {
            prop_assert!(s.bregman(&z, &x).unwrap() >= -1e-12);
            prop_assert!(s.bregman(&z, &z).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn mirror_step_stays_feasible(x in simplex_point(3), p in vector(3, 5.0), b in vector(3, 2.0)) {
        for s in setups(3) {
            let next = s.mirror_step(&x, &p).unwrap();
            prop_assert!(s.set().contains(&next));
        }
        let boxed = ProximalSetup::euclidean(FeasibleSet::unit_box(3), None).unwrap();
        let start: Vec<f64> = b.iter().map(|v| v.abs().min(1.0)).collect();
        prop_assert!(boxed.set().contains(&boxed.mirror_step(&start, &p).unwrap()));
    }

    #[test]
    fn entropy_step_is_multiplicative_weights(x in simplex_point(4), p in vector(4, 4.0)) {
        let s = ProximalSetup::entropy(4).unwrap();
        let got = s.mirror_step(&x, &p).unwrap();
        let w: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a * (-b).exp()).collect();
        let total: f64 = w.iter().sum();
        for (g, wi) in got.iter().zip(&w) {
            prop_assert!((g - wi / total).abs() < 1e-12);
        }
    }

    #[test]
    fn step_inequality_holds(
        x in simplex_point(3),
        u in simplex_point(3),
        c in vector(3, 2.0),
        delta in vector(3, 1.0),
        h in 1e-6f64..3.0,
    ) {
        let f = PointwiseMax::single(Quadratic::affine(c, 0.0));
        for s in setups(3) {
            let chk = check_step_inequality(&s, &f, &x, &u, h, &delta).unwrap();
            prop_assert!(chk.holds, "{:?}", chk);
        }
    }

    #[test]
    fn step_inequality_trivial_at_u_equals_x(x in simplex_point(3), c in vector(3, 2.0), h in 1e-6f64..3.0) {
        let f = PointwiseMax::single(Quadratic::affine(c, 0.0));
        for s in setups(3) {
            let chk = check_step_inequality(&s, &f, &x, &x, h, &[0.0; 3]).unwrap();
            prop_assert_eq!(chk.lhs, 0.0);
            prop_assert!(chk.rhs >= -1e-12);
        }
    }

    #[test]
    fn active_index_is_first_maximizer(bs in prop::collection::vec(-1.0f64..1.0, 1..5), x in simplex_point(2)) {
        let parts: Vec<Quadratic> = bs.iter().map(|b| Quadratic::affine(vec![0.0, 0.0], (b * 4.0).round() / 4.0)).collect();
        let g = PointwiseMax::new(parts.clone()).unwrap();
        let (v, i) = g.value_with_active(&x);
        prop_assert!(parts.iter().all(|q| q.value(&x) <= v));
        prop_assert!(parts[..i].iter().all(|q| q.value(&x) < v));
    }

    #[test]
    fn bounds_monotone_in_epsilon(m in 0.1f64..3.0, theta in 0.1f64..3.0, e1 in 0.01f64..0.5, e2 in 0.01f64..0.5) {
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        prop_assert!(bounds::adaptive_md_bound(m, m, theta, lo) >= bounds::adaptive_md_bound(m, m, theta, hi));
        prop_assert!(bounds::adaptive_smd_bound(m, m, theta, lo) >= bounds::adaptive_smd_bound(m, m, theta, hi));
        prop_assert!(bounds::restart_stages(1.0, 4.0, hi) >= 1);
        prop_assert!(bounds::restart_stages(1.0, 4.0, lo) >= bounds::restart_stages(1.0, 4.0, hi));
    }

    #[test]
    fn floats_survive_json(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        let text = serde_json::to_string(&v).unwrap();
        let back: f64 = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.to_bits(), v.to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn adaptive_md_respects_bound(c in vector(3, 1.0), a in vector(3, 1.0), margin in 0.05f64..0.3, entropy in any::<bool>()) {
        let bary = [1.0 / 3.0; 3];
        let b = -dot(&a, &bary) - margin;
        let setup = if entropy {
            ProximalSetup::entropy(3).unwrap()
        } else {
            ProximalSetup::euclidean(FeasibleSet::simplex(3), None).unwrap()
        };
        let p = make_linear_max_problem(c, vec![a], vec![b], setup).unwrap();
        let eps = 0.05;
        let r = adaptive_md(&p, &SolverConfig::new(eps)).unwrap();
        prop_assert!(r.within_bound);
        prop_assert!(r.iterations <= r.theoretical_bound.unwrap());
        prop_assert!(r.g_bar <= eps);
        let f_star = p.known_optimum().unwrap().f_star;
        prop_assert!(r.f_bar - f_star <= eps);
    }
}
