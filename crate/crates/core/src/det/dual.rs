use crate::error::{check_dim, Error, Result};
use crate::linalg::{axpy, dot, sub, Matrix};
use crate::problem::ProblemInstance;
use crate::prox::Geometry;

const PG_MAX_ITERS: usize = 200_000;
const PG_TOL: f64 = 1e-13;

/// Dual function `φ(λ) = min_X { f(x) + Σ λ_i g_i(x) }`.
///
/// Affine Lagrangians (linear `f` and `g_i`) are minimized exactly over the
/// vertices of the feasible set. Convex quadratic Lagrangians are minimized
/// by accelerated projected gradient to a `1e-13` step tolerance; the result
/// is then an upper estimate of `φ` tight to roughly that tolerance.
/// Objectives with several pieces are not supported.
pub fn dual_value(instance: &ProblemInstance, lambda: &[f64]) -> Result<f64> {
    check_dim(instance.num_constraints(), lambda.len())?;
    if lambda.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(Error::InvalidArgument("multipliers must be finite and nonnegative".into()));
    }
    let [f] = instance.objective().function().parts() else {
        return Err(Error::Unsupported("dual value of a max-type objective".into()));
    };
    let n = instance.dim();
    let mut hessian = f.hessian.clone();
    let mut linear = f.linear.clone();
    let mut constant = f.constant;
    for (part, &l) in instance.constraint().function().parts().iter().zip(lambda) {
        if l == 0.0 {
            continue;
        }
        axpy(&mut linear, l, &part.linear);
        constant += l * part.constant;
        if let Some(h) = &part.hessian {
            hessian.get_or_insert_with(|| Matrix::zeros(n)).add_assign_scaled(h, l);
        }
    }
    let set = instance.setup().set();
    let lagrangian = |x: &[f64]| -> f64 {
        let quad = hessian.as_ref().map_or(0.0, |h| 0.5 * dot(&h.mul_vec(x), x));
        quad + dot(&linear, x) + constant
    };
    match &hessian {
        None => {
            let vertices = set
                .vertices()
                .ok_or_else(|| Error::Unsupported("exact dual value needs a polytope with few vertices".into()))?;
            Ok(vertices.iter().map(|v| lagrangian(v)).fold(f64::INFINITY, f64::min))
        }
        Some(h) => {
            let l = h.max_abs_row_sum();
            if l == 0.0 {
                let vertices = set.vertices().ok_or_else(|| Error::Unsupported("dual value on this set".into()))?;
                return Ok(vertices.iter().map(|v| lagrangian(v)).fold(f64::INFINITY, f64::min));
            }
            let grad = |x: &[f64]| {
                let mut g = h.mul_vec(x);
                axpy(&mut g, 1.0, &linear);
                g
            };
            let mut x = instance.setup().prox_center();
            let mut y = x.clone();
            let mut t = 1.0f64;
            for _ in 0..PG_MAX_ITERS {
                let gy = grad(&y);
                let step: Vec<f64> = y.iter().zip(&gy).map(|(yi, gi)| yi - gi / l).collect();
                let x_next = set.project(&step);
                let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
                let diff = sub(&x_next, &x);
                y = x_next.iter().zip(&diff).map(|(a, d)| a + (t - 1.0) / t_next * d).collect();
                // Restart momentum when it stops helping.
                if dot(&sub(&y, &x_next), &diff) > 0.0 && lagrangian(&x_next) > lagrangian(&x) {
                    y = x_next.clone();
                    t = 1.0;
                } else {
                    t = t_next;
                }
                let moved = diff.iter().map(|d| d.abs()).fold(0.0, f64::max);
                x = x_next;
                if moved < PG_TOL {
                    break;
                }
            }
            Ok(lagrangian(&x))
        }
    }
}
