use serde::{Deserialize, Serialize};

use super::set::FeasibleSet;
use crate::error::{check_dim, check_finite, Error, Result};
use crate::linalg::{dist2_sq, norm1, norm2, norm_inf, scale, sub};

/// Components below this value are clamped inside the entropy gradient.
pub const ENTROPY_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    L2,
    L1,
}

impl NormKind {
    pub fn norm(self, x: &[f64]) -> f64 {
        match self {
            NormKind::L2 => norm2(x),
            NormKind::L1 => norm1(x),
        }
    }

    pub fn dual_norm(self, g: &[f64]) -> f64 {
        match self {
            NormKind::L2 => norm2(g),
            NormKind::L1 => norm_inf(g),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProxKind {
    /// `d(x) = ½|x - center|²`, with `center` already projected onto `X`.
    Euclidean { center: Vec<f64> },
    /// `d(x) = Σ x_i ln x_i + ln n` on the simplex.
    Entropy,
}

/// The geometry a mirror-descent run works in.
///
/// Implemented by [`ProximalSetup`] and by the rescaled [`ShiftedSetup`].
pub trait Geometry: Send + Sync {
    fn dim(&self) -> usize;
    fn set(&self) -> &FeasibleSet;
    fn norm(&self, x: &[f64]) -> Result<f64>;
    fn dual_norm(&self, g: &[f64]) -> Result<f64>;
    /// The prox-function `d`.
    fn prox_value(&self, x: &[f64]) -> Result<f64>;
    /// A selection of `∇d`.
    fn prox_gradient(&self, x: &[f64]) -> Result<Vec<f64>>;
    /// `V[z](x) = d(x) - d(z) - <∇d(z), x - z>`.
    fn bregman(&self, z: &[f64], x: &[f64]) -> Result<f64>;
    /// `argmin_{u in X} <p, u> + V[x](u)`.
    fn mirror_step(&self, x: &[f64], p: &[f64]) -> Result<Vec<f64>>;
    /// `argmin_{x in X} d(x)`.
    fn prox_center(&self) -> Vec<f64>;
}

/// Norm, prox-function and feasible set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProximalSetup {
    set: FeasibleSet,
    kind: ProxKind,
    prox_center: Vec<f64>,
    theta0_sq_default: f64,
}

impl ProximalSetup {
    /// Euclidean setup `d(x) = ½|x - c|²`. Without a center, the natural
    /// center of the set (box midpoint, simplex barycenter) is used. A center
    /// outside `X` is replaced by its projection, which leaves the Bregman
    /// divergence unchanged and makes `min_X d = 0`.
    pub fn euclidean(set: FeasibleSet, center: Option<Vec<f64>>) -> Result<Self> {
        set.validate()?;
        let center = match center {
            Some(c) => {
                check_dim(set.dim(), c.len())?;
                check_finite(&c, "prox center")?;
                set.project(&c)
            }
            None => set.natural_center(),
        };
        let theta0_sq_default = euclidean_max_prox(&set, &center);
        Ok(Self {
            prox_center: center.clone(),
            kind: ProxKind::Euclidean { center },
            set,
            theta0_sq_default,
        })
    }

    /// Entropy setup on the `n`-dimensional simplex.
    pub fn entropy(n: usize) -> Result<Self> {
        let set = FeasibleSet::simplex(n);
        set.validate()?;
        Ok(Self {
            set,
            kind: ProxKind::Entropy,
            prox_center: vec![1.0 / n as f64; n],
            theta0_sq_default: (n as f64).ln(),
        })
    }

    /// Builds a setup of the given kind on `set`; entropy accepts only a simplex.
    pub fn new(set: FeasibleSet, kind: ProxKind) -> Result<Self> {
        match kind {
            ProxKind::Euclidean { center } => Self::euclidean(set, Some(center)),
            ProxKind::Entropy => match set {
                FeasibleSet::Simplex { dim } => Self::entropy(dim),
                other => Err(Error::Unsupported(format!(
                    "entropy setup is only available on the simplex, not on {other:?}"
                ))),
            },
        }
    }

    /// Same prox-function restricted to another set (used for the
    /// ball-restricted stages of the large-deviation restart).
    pub fn with_set(&self, set: FeasibleSet) -> Result<Self> {
        check_dim(self.dim(), set.dim())?;
        match &self.kind {
            ProxKind::Euclidean { center } => Self::euclidean(set, Some(center.clone())),
            ProxKind::Entropy => match set {
                FeasibleSet::Simplex { .. } => Ok(self.clone()),
                _ => Err(Error::Unsupported(
                    "entropy setup does not support ball-intersection sets".into(),
                )),
            },
        }
    }

    pub fn kind(&self) -> &ProxKind {
        &self.kind
    }

    pub fn norm_kind(&self) -> NormKind {
        match self.kind {
            ProxKind::Euclidean { .. } => NormKind::L2,
            ProxKind::Entropy => NormKind::L1,
        }
    }

    pub fn is_entropy(&self) -> bool {
        matches!(self.kind, ProxKind::Entropy)
    }

    /// `max_X d`, the default `Θ₀²`.
    pub fn max_prox_value(&self) -> f64 {
        self.theta0_sq_default
    }

    pub fn theta0_sq_default(&self) -> f64 {
        self.theta0_sq_default
    }

    /// `sup_{x,y in X} V[x](y)`, or `None` when unbounded (entropy).
    pub fn bregman_diameter_sq(&self) -> Option<f64> {
        match self.kind {
            ProxKind::Euclidean { .. } => Some(0.5 * self.set.diameter_sq()),
            ProxKind::Entropy => None,
        }
    }

    /// `Ω` with `d(x) <= Ω/2` on the unit ball of the norm, for the kernel the
    /// restart schemes rescale. Only the Euclidean kernel `½|x|²` qualifies.
    pub fn restart_omega(&self) -> Option<f64> {
        match self.kind {
            ProxKind::Euclidean { .. } => Some(1.0),
            ProxKind::Entropy => None,
        }
    }

    fn check_point(&self, x: &[f64], what: &'static str) -> Result<()> {
        check_dim(self.dim(), x.len())?;
        check_finite(x, what)
    }
}

fn euclidean_max_prox(set: &FeasibleSet, center: &[f64]) -> f64 {
    match set {
        FeasibleSet::Box { lower, upper } => 0.5
            * lower
                .iter()
                .zip(upper)
                .zip(center)
                .map(|((l, u), c)| (l - c).powi(2).max((u - c).powi(2)))
                .sum::<f64>(),
        FeasibleSet::Simplex { .. } => set
            .vertices()
            .unwrap_or_default()
            .iter()
            .map(|v| 0.5 * dist2_sq(v, center))
            .fold(0.0, f64::max),
        FeasibleSet::BallIntersection { base, center: bc, radius_sq } => {
            let through_ball = 0.5 * (dist2_sq(bc, center).sqrt() + radius_sq.sqrt()).powi(2);
            euclidean_max_prox(base, center).min(through_ball)
        }
    }
}

fn entropy_value(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    x.iter().map(|&v| if v > 0.0 { v * v.ln() } else { 0.0 }).sum::<f64>() + n.ln()
}

/// Multiplicative-weights update `x_i e^{-p_i} / Σ_j x_j e^{-p_j}`, evaluated
/// in the log domain.
fn entropy_step(x: &[f64], p: &[f64]) -> Vec<f64> {
    let w: Vec<f64> = x.iter().zip(p).map(|(xi, pi)| xi.max(ENTROPY_FLOOR).ln() - pi).collect();
    let m = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = w.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

impl Geometry for ProximalSetup {
    fn dim(&self) -> usize {
        self.set.dim()
    }

    fn set(&self) -> &FeasibleSet {
        &self.set
    }

    fn norm(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.norm_kind().norm(x))
    }

    fn dual_norm(&self, g: &[f64]) -> Result<f64> {
        check_dim(self.dim(), g.len())?;
        Ok(self.norm_kind().dual_norm(g))
    }

    fn prox_value(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x, "point")?;
        match &self.kind {
            ProxKind::Euclidean { center } => Ok(0.5 * dist2_sq(x, center)),
            ProxKind::Entropy => {
                if x.iter().any(|v| *v < 0.0) {
                    return Err(Error::Domain("entropy is undefined at negative components".into()));
                }
                Ok(entropy_value(x))
            }
        }
    }

    fn prox_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x, "point")?;
        Ok(match &self.kind {
            ProxKind::Euclidean { center } => sub(x, center),
            ProxKind::Entropy => x.iter().map(|v| v.max(ENTROPY_FLOOR).ln() + 1.0).collect(),
        })
    }

    fn bregman(&self, z: &[f64], x: &[f64]) -> Result<f64> {
        self.check_point(z, "bregman center")?;
        self.check_point(x, "bregman argument")?;
        match &self.kind {
            ProxKind::Euclidean { .. } => Ok(0.5 * dist2_sq(x, z)),
            ProxKind::Entropy => {
                if z.iter().any(|v| *v <= 0.0) {
                    return Err(Error::Domain(
                        "entropy Bregman divergence needs a center with positive components".into(),
                    ));
                }
                if x.iter().any(|v| *v < 0.0) {
                    return Err(Error::Domain("entropy is undefined at negative components".into()));
                }
                Ok(x.iter()
                    .zip(z)
                    .map(|(&xi, &zi)| if xi > 0.0 { xi * (xi / zi).ln() - xi + zi } else { zi })
                    .sum())
            }
        }
    }

    fn mirror_step(&self, x: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x, "mirror-step point")?;
        check_dim(self.dim(), p.len())?;
        check_finite(p, "mirror-step direction")?;
        Ok(match &self.kind {
            ProxKind::Euclidean { .. } => self.set.project(&sub(x, p)),
            ProxKind::Entropy => entropy_step(x, p),
        })
    }

    fn prox_center(&self) -> Vec<f64> {
        self.prox_center.clone()
    }
}

/// Euclidean setup rescaled around `center` with radius `R`:
/// `d_R(x) = ½|(x - center)/R|²`, which is 1-strongly convex w.r.t. `|·|/R`
/// (dual norm `R|·|`).
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedSetup {
    base: ProximalSetup,
    set: FeasibleSet,
    center: Vec<f64>,
    radius: f64,
}

impl ShiftedSetup {
    pub fn new(base: &ProximalSetup, center: Vec<f64>, radius: f64) -> Result<Self> {
        if base.is_entropy() {
            return Err(Error::Unsupported("shifted setups require a Euclidean base setup".into()));
        }
        check_dim(base.dim(), center.len())?;
        check_finite(&center, "shift center")?;
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidArgument(format!("shift radius must be positive, got {radius}")));
        }
        Ok(Self { set: base.set().clone(), base: base.clone(), center, radius })
    }

    /// Replaces the feasible set (e.g. by `X ∩ ball`).
    pub fn restricted_to(mut self, set: FeasibleSet) -> Result<Self> {
        set.validate()?;
        check_dim(self.dim(), set.dim())?;
        self.set = set;
        Ok(self)
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn rescale(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.center).map(|(v, c)| (v - c) / self.radius).collect()
    }
}

impl Geometry for ShiftedSetup {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn set(&self) -> &FeasibleSet {
        &self.set
    }

    fn norm(&self, x: &[f64]) -> Result<f64> {
        Ok(self.base.norm(x)? / self.radius)
    }

    fn dual_norm(&self, g: &[f64]) -> Result<f64> {
        Ok(self.base.dual_norm(g)? * self.radius)
    }

    fn prox_value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(0.5 * crate::linalg::norm2_sq(&self.rescale(x)))
    }

    fn prox_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok(scale(&sub(x, &self.center), 1.0 / (self.radius * self.radius)))
    }

    fn bregman(&self, z: &[f64], x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), z.len())?;
        check_dim(self.dim(), x.len())?;
        self.base.bregman(&self.rescale(z), &self.rescale(x))
    }

    fn mirror_step(&self, x: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.dim(), p.len())?;
        check_finite(x, "mirror-step point")?;
        check_finite(p, "mirror-step direction")?;
        let r2 = self.radius * self.radius;
        let y: Vec<f64> = x.iter().zip(p).map(|(a, b)| a - r2 * b).collect();
        Ok(self.set.project(&y))
    }

    fn prox_center(&self) -> Vec<f64> {
        self.set.project(&self.center)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_norm_examples() {
        let e = ProximalSetup::euclidean(FeasibleSet::unit_box(2), None).unwrap();
        assert_eq!(e.dual_norm(&[3.0, 4.0]).unwrap(), 5.0);
        let h = ProximalSetup::entropy(2).unwrap();
        assert_eq!(h.dual_norm(&[1.0, -2.0]).unwrap(), 2.0);
        assert_eq!(h.norm(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(e.norm(&[0.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(e.norm(&[1.0]), Err(Error::DimensionMismatch { expected: 2, got: 1 })));
    }

    #[test]
    fn euclidean_bregman_example() {
        let e = ProximalSetup::euclidean(FeasibleSet::unit_box(2), None).unwrap();
        assert_eq!(e.bregman(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 12.5);
    }

    #[test]
    fn entropy_bregman_rejects_boundary_center() {
        let h = ProximalSetup::entropy(2).unwrap();
        assert!(matches!(h.bregman(&[1.0, 0.0], &[0.5, 0.5]), Err(Error::Domain(_))));
        assert_eq!(h.bregman(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
    }

    #[test]
    fn box_mirror_step_example() {
        let e = ProximalSetup::euclidean(FeasibleSet::unit_box(2), None).unwrap();
        assert_eq!(e.mirror_step(&[0.5, 0.5], &[1.0, -1.0]).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn mirror_step_rejects_non_finite_direction() {
        let h = ProximalSetup::entropy(2).unwrap();
        assert!(matches!(h.mirror_step(&[0.5, 0.5], &[f64::NAN, 0.0]), Err(Error::NonFinite(_))));
    }

    #[test]
    fn prox_centers() {
        let e = ProximalSetup::euclidean(FeasibleSet::unit_box(2), Some(vec![0.2, 0.2])).unwrap();
        assert_eq!(e.prox_center(), vec![0.2, 0.2]);
        assert_eq!(e.prox_value(&[0.2, 0.2]).unwrap(), 0.0);
        let h = ProximalSetup::entropy(4).unwrap();
        assert_eq!(h.prox_center(), vec![0.25; 4]);
        assert!(h.prox_value(&h.prox_center()).unwrap().abs() < 1e-12);
        let s = ProximalSetup::euclidean(FeasibleSet::simplex(3), None).unwrap();
        assert_eq!(s.prox_center(), vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn theta0_defaults() {
        let h = ProximalSetup::entropy(3).unwrap();
        assert!((h.theta0_sq_default() - 3f64.ln()).abs() < 1e-15);
        let b = ProximalSetup::euclidean(FeasibleSet::unit_box(2), Some(vec![0.2, 0.2])).unwrap();
        assert!((b.theta0_sq_default() - 0.5 * (0.64 + 0.64)).abs() < 1e-15);
        let s = ProximalSetup::euclidean(FeasibleSet::simplex(2), None).unwrap();
        assert!((s.theta0_sq_default() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn entropy_rejects_non_simplex() {
        assert!(ProximalSetup::new(FeasibleSet::unit_box(2), ProxKind::Entropy).is_err());
        let h = ProximalSetup::entropy(2).unwrap();
        assert!(h.with_set(FeasibleSet::simplex(2).intersect_ball(vec![0.5, 0.5], 0.1)).is_err());
        assert!(ShiftedSetup::new(&h, vec![0.5, 0.5], 1.0).is_err());
    }

    #[test]
    fn shifted_setup_scales_norms() {
        let e = ProximalSetup::euclidean(FeasibleSet::unit_box(2), None).unwrap();
        let s = ShiftedSetup::new(&e, vec![0.5, 0.5], 0.5).unwrap();
        assert_eq!(s.dual_norm(&[3.0, 4.0]).unwrap(), 2.5);
        assert_eq!(s.norm(&[3.0, 4.0]).unwrap(), 10.0);
        assert_eq!(s.prox_center(), vec![0.5, 0.5]);
        assert_eq!(s.prox_value(&[0.5, 0.5]).unwrap(), 0.0);
    }
}
