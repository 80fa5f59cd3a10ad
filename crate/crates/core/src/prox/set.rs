use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dist2_sq, norm2};
use crate::rng::Rng;

/// Membership tolerance on box bounds and the simplex sum.
pub const MEMBERSHIP_TOL: f64 = 1e-12;
/// Membership tolerance on the ball constraint; the alternating projection
/// used for intersections stops at this accuracy level.
pub const BALL_TOL: f64 = 1e-9;

const DYKSTRA_TOL: f64 = 1e-12;
const DYKSTRA_MAX_ITER: usize = 10_000;

/// Closed convex feasible set `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FeasibleSet {
    /// Coordinate box `lower <= x <= upper`.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Standard unit simplex `{x >= 0, sum x = 1}`.
    Simplex { dim: usize },
    /// `base ∩ {x : |x - center|_2^2 <= radius_sq}`.
    BallIntersection {
        base: std::boxed::Box<FeasibleSet>,
        center: Vec<f64>,
        radius_sq: f64,
    },
}

impl FeasibleSet {
    pub fn unit_box(dim: usize) -> Self {
        Self::Box { lower: vec![0.0; dim], upper: vec![1.0; dim] }
    }

    pub fn simplex(dim: usize) -> Self {
        Self::Simplex { dim }
    }

    pub fn intersect_ball(self, center: Vec<f64>, radius_sq: f64) -> Self {
        Self::BallIntersection { base: std::boxed::Box::new(self), center, radius_sq }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Box { lower, .. } => lower.len(),
            Self::Simplex { dim } => *dim,
            Self::BallIntersection { base, .. } => base.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Box { lower, upper } => {
                if lower.is_empty() || lower.len() != upper.len() {
                    return Err(Error::InvalidSet(format!(
                        "box bounds have lengths {} and {}",
                        lower.len(),
                        upper.len()
                    )));
                }
                if lower.iter().chain(upper).any(|v| !v.is_finite()) {
                    return Err(Error::InvalidSet("box bounds must be finite".into()));
                }
                if lower.iter().zip(upper).any(|(l, u)| l > u) {
                    return Err(Error::InvalidSet("box is empty (lower > upper)".into()));
                }
                Ok(())
            }
            Self::Simplex { dim } => {
                if *dim == 0 {
                    Err(Error::InvalidSet("simplex dimension must be positive".into()))
                } else {
                    Ok(())
                }
            }
            Self::BallIntersection { base, center, radius_sq } => {
                base.validate()?;
                if center.len() != base.dim() {
                    return Err(Error::DimensionMismatch { expected: base.dim(), got: center.len() });
                }
                if !(radius_sq.is_finite() && *radius_sq > 0.0) || center.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidSet("ball must have finite center and positive radius".into()));
                }
                let p = base.project(center);
                if dist2_sq(&p, center) > *radius_sq {
                    return Err(Error::InvalidSet("ball does not meet the base set".into()));
                }
                Ok(())
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            Self::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (l, u))| *v >= l - MEMBERSHIP_TOL && *v <= u + MEMBERSHIP_TOL),
            Self::Simplex { .. } => {
                x.iter().all(|v| *v >= -MEMBERSHIP_TOL) && (x.iter().sum::<f64>() - 1.0).abs() <= MEMBERSHIP_TOL
            }
            Self::BallIntersection { base, center, radius_sq } => {
                base.contains(x) && dist2_sq(x, center) <= radius_sq + BALL_TOL
            }
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, y: &[f64]) -> Vec<f64> {
        match self {
            Self::Box { lower, upper } => y
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(v, (l, u))| v.clamp(*l, *u))
                .collect(),
            Self::Simplex { .. } => project_simplex(y),
            Self::BallIntersection { base, center, radius_sq } => {
                project_intersection(base, center, *radius_sq, y)
            }
        }
    }

    /// Extreme points, when the set is a polytope with a manageable number of them.
    pub fn vertices(&self) -> Option<Vec<Vec<f64>>> {
        match self {
            Self::Simplex { dim } => Some(
                (0..*dim)
                    .map(|i| {
                        let mut e = vec![0.0; *dim];
                        e[i] = 1.0;
                        e
                    })
                    .collect(),
            ),
            Self::Box { lower, upper } if lower.len() <= 16 => {
                let n = lower.len();
                Some(
                    (0..1usize << n)
                        .map(|mask| {
                            (0..n).map(|i| if mask >> i & 1 == 1 { upper[i] } else { lower[i] }).collect()
                        })
                        .collect(),
                )
            }
            _ => None,
        }
    }

    /// Squared Euclidean diameter, or an upper bound on it.
    pub fn diameter_sq(&self) -> f64 {
        match self {
            Self::Box { lower, upper } => dist2_sq(lower, upper),
            Self::Simplex { dim } => {
                if *dim > 1 {
                    2.0
                } else {
                    0.0
                }
            }
            Self::BallIntersection { base, radius_sq, .. } => base.diameter_sq().min(4.0 * radius_sq),
        }
    }

    /// A point in the relative interior chosen by symmetry.
    pub fn natural_center(&self) -> Vec<f64> {
        match self {
            Self::Box { lower, upper } => lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect(),
            Self::Simplex { dim } => vec![1.0 / *dim as f64; *dim],
            Self::BallIntersection { base, center, .. } => self.project(&base.project(center)),
        }
    }

    /// Random point of the relative interior: uniform on boxes, flat
    /// Dirichlet on the simplex, rejection from the base set for ball
    /// intersections (falling back to a point between a base sample and the
    /// ball center).
    pub fn sample_interior(&self, rng: &mut Rng) -> Vec<f64> {
        match self {
            Self::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| l + (u - l) * rng.random::<f64>())
                .collect(),
            Self::Simplex { dim } => {
                let e: Vec<f64> = (0..*dim).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
                let s: f64 = e.iter().sum();
                e.into_iter().map(|v| v / s).collect()
            }
            Self::BallIntersection { base, center, radius_sq } => {
                for _ in 0..1000 {
                    let x = base.sample_interior(rng);
                    if dist2_sq(&x, center) < *radius_sq {
                        return x;
                    }
                }
                let anchor = self.natural_center();
                let x = base.sample_interior(rng);
                let t = rng.random::<f64>() * 0.5;
                anchor.iter().zip(&x).map(|(a, b)| a + t * (b - a)).collect()
            }
        }
    }
}

/// Euclidean projection onto the unit simplex by sorting.
pub fn project_simplex(y: &[f64]) -> Vec<f64> {
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    y.iter().map(|v| (v - theta).max(0.0)).collect()
}

fn project_ball(center: &[f64], radius_sq: f64, y: &[f64]) -> Vec<f64> {
    let d: Vec<f64> = y.iter().zip(center).map(|(a, c)| a - c).collect();
    let r = norm2(&d);
    let radius = radius_sq.sqrt();
    if r <= radius {
        y.to_vec()
    } else {
        center.iter().zip(&d).map(|(c, v)| c + v * (radius / r)).collect()
    }
}

/// Dykstra's alternating projections onto `base ∩ ball`.
fn project_intersection(base: &FeasibleSet, center: &[f64], radius_sq: f64, y: &[f64]) -> Vec<f64> {
    let pb = base.project(y);
    if dist2_sq(&pb, center) <= radius_sq {
        return pb;
    }
    let pr = project_ball(center, radius_sq, y);
    if base.contains(&pr) {
        return pr;
    }
    let n = y.len();
    let mut x = y.to_vec();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for _ in 0..DYKSTRA_MAX_ITER {
        let xp: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + b).collect();
        let a = base.project(&xp);
        for i in 0..n {
            p[i] = xp[i] - a[i];
        }
        let aq: Vec<f64> = a.iter().zip(&q).map(|(u, v)| u + v).collect();
        let b = project_ball(center, radius_sq, &aq);
        for i in 0..n {
            q[i] = aq[i] - b[i];
        }
        let moved = dist2_sq(&b, &x).sqrt().max(dist2_sq(&a, &b).sqrt());
        x = b;
        if moved <= DYKSTRA_TOL {
            break;
        }
    }
    // The last iterate lies in the ball; pull it into the base set, which moves
    // it by at most the residual gap between the two projections.
    base.project(&x)
}
