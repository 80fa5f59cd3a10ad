//! Brute-force reference optima: exhaustive grids and exact vertex enumeration.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{dot, solve_dense};
use crate::problem::{OracleMethod, OracleResult, PointwiseMax, ProblemInstance};
use crate::prox::{FeasibleSet, Geometry};

/// Largest grid the exhaustive scan will visit.
pub const MAX_GRID_POINTS: f64 = 4.0e8;
/// Largest dimension the grid oracle accepts.
pub const MAX_GRID_DIM: usize = 4;
const VERTEX_TOL: f64 = 1e-9;

/// Exhaustive scan of `min f` over grid points of `X` with `g <= 0` (exact
/// comparison). Simplex grids use step `1/ceil(1/resolution)`; box grids use
/// per-coordinate steps no larger than `resolution` and include both ends.
pub fn grid_optimum(instance: &ProblemInstance, resolution: f64) -> Result<OracleResult> {
    let f = instance.objective().function();
    let g = instance.constraint().function();
    grid_minimize(instance.setup().set(), resolution, |x| {
        if g.value(x) <= 0.0 {
            Some(f.value(x))
        } else {
            None
        }
    })?
    .ok_or_else(|| {
        Error::Domain(format!(
            "no feasible grid point at resolution {resolution}; the Slater point {:?} is strictly feasible, refine the grid around it",
            instance.slater_point()
        ))
    })
}

/// Minimum of `eval` over the grid of `set`; `eval` returns `None` at
/// excluded points. Ties keep the first point in lexicographic order of the
/// grid indices. `Ok(None)` means no grid point was accepted.
pub fn grid_minimize<F>(set: &FeasibleSet, resolution: f64, eval: F) -> Result<Option<OracleResult>>
where
    F: Fn(&[f64]) -> Option<f64> + Sync,
{
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(Error::InvalidArgument(format!("grid resolution must be positive, got {resolution}")));
    }
    let n = set.dim();
    if n > MAX_GRID_DIM {
        return Err(Error::Unsupported(format!("grid oracle limited to dimension {MAX_GRID_DIM}, got {n}")));
    }
    let mut filter: Option<&FeasibleSet> = None;
    let mut base = set;
    while let FeasibleSet::BallIntersection { base: b, .. } = base {
        filter = Some(set);
        base = &**b;
    }
    let (axes, step) = match base {
        FeasibleSet::Simplex { dim } => {
            let k = (1.0 / resolution).ceil() as usize;
            let count = binomial(k + dim - 1, dim - 1);
            check_grid_size(count)?;
            let best = scan_simplex(*dim, k, &|x: &[f64]| {
                if filter.is_some_and(|s| !s.contains(x)) {
                    return None;
                }
                eval(x)
            });
            return Ok(best.map(|(f_star, x_star)| OracleResult {
                f_star,
                x_star,
                method: OracleMethod::Grid,
                resolution: Some(1.0 / k as f64),
            }));
        }
        FeasibleSet::Box { lower, upper } => {
            let axes: Vec<Vec<f64>> = lower
                .iter()
                .zip(upper)
                .map(|(&l, &u)| {
                    let steps = ((u - l) / resolution).ceil().max(1.0) as usize;
                    (0..=steps).map(|i| if i == steps { u } else { l + (u - l) * i as f64 / steps as f64 }).collect()
                })
                .collect();
            let step = lower.iter().zip(upper).map(|(&l, &u)| (u - l) / ((u - l) / resolution).ceil().max(1.0)).fold(0.0, f64::max);
            (axes, step)
        }
        FeasibleSet::BallIntersection { .. } => unreachable!(),
    };
    check_grid_size(axes.iter().map(|a| a.len() as f64).product())?;
    let best = axes[0]
        .par_iter()
        .map(|&x0| {
            let mut x = vec![0.0; n];
            x[0] = x0;
            let mut best = None;
            scan_box(&axes, 1, &mut x, &mut best, &|x: &[f64]| {
                if filter.is_some_and(|s| !s.contains(x)) {
                    return None;
                }
                eval(x)
            });
            best
        })
        .reduce(|| None, pick);
    Ok(best.map(|(f_star, x_star)| OracleResult { f_star, x_star, method: OracleMethod::Grid, resolution: Some(step) }))
}

fn check_grid_size(count: f64) -> Result<()> {
    if count > MAX_GRID_POINTS {
        return Err(Error::Unsupported(format!("grid of {count:.3e} points exceeds the {MAX_GRID_POINTS:.0e} cap")));
    }
    Ok(())
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

type Best = Option<(f64, Vec<f64>)>;

fn pick(a: Best, b: Best) -> Best {
    match (a, b) {
        (Some(a), Some(b)) => Some(if b.0 < a.0 { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    }
}

fn consider(best: &mut Best, fx: f64, x: &[f64]) {
    if best.as_ref().is_none_or(|(b, _)| fx < *b) {
        *best = Some((fx, x.to_vec()));
    }
}

fn scan_box<F: Fn(&[f64]) -> Option<f64>>(axes: &[Vec<f64>], i: usize, x: &mut [f64], best: &mut Best, eval: &F) {
    if i == axes.len() {
        if let Some(fx) = eval(x) {
            consider(best, fx, x);
        }
        return;
    }
    for &v in &axes[i] {
        x[i] = v;
        scan_box(axes, i + 1, x, best, eval);
    }
}

fn scan_simplex<F: Fn(&[f64]) -> Option<f64> + Sync>(n: usize, k: usize, eval: &F) -> Best {
    let kf = k as f64;
    (0..=k)
        .into_par_iter()
        .map(|k0| {
            let mut counts = vec![0usize; n];
            let mut x = vec![0.0; n];
            counts[0] = k0;
            x[0] = k0 as f64 / kf;
            let mut best = None;
            compositions(&mut counts, &mut x, 1, k - k0, kf, &mut best, eval);
            best
        })
        .reduce(|| None, pick)
}

fn compositions<F: Fn(&[f64]) -> Option<f64>>(
    counts: &mut [usize],
    x: &mut [f64],
    i: usize,
    remaining: usize,
    kf: f64,
    best: &mut Best,
    eval: &F,
) {
    let n = counts.len();
    if i == n - 1 {
        counts[i] = remaining;
        x[i] = remaining as f64 / kf;
        if let Some(fx) = eval(x) {
            consider(best, fx, x);
        }
        return;
    }
    for c in 0..=remaining {
        counts[i] = c;
        x[i] = c as f64 / kf;
        compositions(counts, x, i + 1, remaining - c, kf, best, eval);
    }
}

/// Exact minimum of an affine objective over `{x in X : g_i(x) <= 0}` with
/// affine `g_i` and polyhedral `X`, by enumerating basic feasible points.
pub fn vertex_optimum(objective: &PointwiseMax, constraint: &PointwiseMax, set: &FeasibleSet) -> Result<OracleResult> {
    let [f] = objective.parts() else {
        return Err(Error::Unsupported("vertex enumeration needs a single affine objective".into()));
    };
    if !f.is_affine() || !constraint.is_affine() {
        return Err(Error::Unsupported("vertex enumeration needs affine functions".into()));
    }
    let n = set.dim();
    let mut equalities: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut inequalities: Vec<(Vec<f64>, f64)> = Vec::new();
    let unit = |i: usize, s: f64| {
        let mut e = vec![0.0; n];
        e[i] = s;
        e
    };
    match set {
        FeasibleSet::Simplex { .. } => {
            equalities.push((vec![1.0; n], 1.0));
            inequalities.extend((0..n).map(|i| (unit(i, -1.0), 0.0)));
        }
        FeasibleSet::Box { lower, upper } => {
            for i in 0..n {
                inequalities.push((unit(i, -1.0), -lower[i]));
                inequalities.push((unit(i, 1.0), upper[i]));
            }
        }
        FeasibleSet::BallIntersection { .. } => {
            return Err(Error::Unsupported("vertex enumeration on a ball intersection".into()));
        }
    }
    for part in constraint.parts() {
        inequalities.push((part.linear.clone(), -part.constant));
    }

    let need = n - equalities.len();
    let mut best: Best = None;
    for_each_subset(inequalities.len(), need, &mut |idx| {
        let (rows, rhs): (Vec<Vec<f64>>, Vec<f64>) =
            equalities.iter().chain(idx.iter().map(|&i| &inequalities[i])).cloned().unzip();
        let Some(x) = solve_dense(rows, rhs) else { return };
        if inequalities.iter().all(|(a, b)| dot(a, &x) <= b + VERTEX_TOL)
            && equalities.iter().all(|(a, b)| (dot(a, &x) - b).abs() <= VERTEX_TOL)
        {
            let fx = f.value(&x);
            if best.as_ref().is_none_or(|(b, _)| fx < b - 1e-12) {
                best = Some((fx, x));
            }
        }
    });
    let (f_star, x_star) = best.ok_or(Error::Infeasible { value: constraint.value(&set.natural_center()) })?;
    Ok(OracleResult { f_star, x_star, method: OracleMethod::VertexEnumeration, resolution: None })
}

fn for_each_subset(n: usize, k: usize, visit: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, chosen: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if chosen.len() == k {
            visit(chosen);
            return;
        }
        for i in start..=n - (k - chosen.len()) {
            chosen.push(i);
            rec(i + 1, n, k, chosen, visit);
            chosen.pop();
        }
    }
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), visit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{make_linear_max_problem, Quadratic};
    use crate::prox::ProximalSetup;

    fn p1() -> ProblemInstance {
        make_linear_max_problem(vec![1.0, 0.0], vec![vec![-1.0, 0.0]], vec![0.4], ProximalSetup::entropy(2).unwrap())
            .unwrap()
    }

    #[test]
    fn p1_grid_at_two_resolutions() {
        let p = p1();
        let fine = grid_optimum(&p, 1e-3).unwrap();
        let coarse = grid_optimum(&p, 2e-3).unwrap();
        assert!((fine.f_star - 0.4).abs() <= 1.5e-3);
        assert!((fine.f_star - coarse.f_star).abs() <= 2e-3 * 2f64.sqrt());
        assert_eq!(fine.method, OracleMethod::Grid);
        assert_eq!(fine.resolution, Some(1e-3));
    }

    #[test]
    fn unconstrained_linear_hits_vertex() {
        let p = make_linear_max_problem(vec![1.0, 0.0], vec![vec![0.0, 0.0]], vec![-1.0], ProximalSetup::entropy(2).unwrap())
            .unwrap();
        let r = grid_optimum(&p, 1e-2).unwrap();
        assert_eq!(r.f_star, 0.0);
        assert_eq!(r.x_star, vec![0.0, 1.0]);
    }

    #[test]
    fn empty_grid_is_an_error() {
        let set = FeasibleSet::simplex(2);
        assert!(grid_minimize(&set, 1e-2, |_| None).unwrap().is_none());
    }

    #[test]
    fn box_and_ball_grids() {
        let set = FeasibleSet::unit_box(2);
        let r = grid_minimize(&set, 0.3, |x| Some((x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2))).unwrap().unwrap();
        assert!(r.resolution.unwrap() <= 0.3);
        assert!(r.f_star <= 2.0 * 0.15f64.powi(2) + 1e-12);
        let ball = FeasibleSet::unit_box(2).intersect_ball(vec![0.0, 0.0], 0.25);
        let r = grid_minimize(&ball, 1e-2, |x| Some(-x[0] - x[1])).unwrap().unwrap();
        assert!(r.x_star[0].powi(2) + r.x_star[1].powi(2) <= 0.25 + 1e-9);
        assert!((r.f_star + 0.5f64.sqrt()).abs() < 0.02);
    }

    #[test]
    fn oversized_grids_rejected() {
        assert!(grid_minimize(&FeasibleSet::unit_box(4), 1e-3, |_| Some(0.0)).is_err());
        assert!(grid_minimize(&FeasibleSet::simplex(5), 0.5, |_| Some(0.0)).is_err());
    }

    #[test]
    fn vertex_enumeration_matches_hand_solution() {
        let f = PointwiseMax::single(Quadratic::affine(vec![1.0, 2.0, 0.5], 0.0));
        let g = PointwiseMax::new(vec![
            Quadratic::affine(vec![-1.0, 0.0, 0.0], 0.2),
            Quadratic::affine(vec![0.0, 0.0, 1.0], -0.3),
        ])
        .unwrap();
        let r = vertex_optimum(&f, &g, &FeasibleSet::simplex(3)).unwrap();
        // x1 >= 0.2, x3 <= 0.3: put 0.3 on x3, the rest on x1.
        assert!((r.f_star - (0.7 + 0.15)).abs() < 1e-12);
        let b = vertex_optimum(&f, &g, &FeasibleSet::unit_box(3)).unwrap();
        assert!((b.f_star - 0.2).abs() < 1e-12);
    }
}
