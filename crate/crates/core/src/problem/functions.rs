use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{add, dot, Matrix};
use crate::prox::{FeasibleSet, NormKind};

/// `½ xᵀHx + <linear, x> + constant` with symmetric `H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quadratic {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hessian: Option<Matrix>,
    pub linear: Vec<f64>,
    #[serde(default)]
    pub constant: f64,
}

impl Quadratic {
    /// Affine function `<c, x> + b`.
    pub fn affine(c: Vec<f64>, b: f64) -> Self {
        Self { hessian: None, linear: c, constant: b }
    }

    /// `½ xᵀHx + <c, x> + b`; `H` is symmetrized.
    pub fn new(hessian: Matrix, c: Vec<f64>, b: f64) -> Result<Self> {
        check_dim(hessian.dim(), c.len())?;
        let h = hessian.symmetrized();
        Ok(Self { hessian: if h.is_zero() { None } else { Some(h) }, linear: c, constant: b })
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(h) = &self.hessian {
            check_dim(self.dim(), h.dim())?;
        }
        if self.linear.iter().any(|v| !v.is_finite()) || !self.constant.is_finite() {
            return Err(Error::NonFinite("function coefficients"));
        }
        Ok(())
    }

    pub fn is_affine(&self) -> bool {
        self.hessian.is_none()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let quad = self.hessian.as_ref().map_or(0.0, |h| 0.5 * dot(&h.mul_vec(x), x));
        quad + dot(&self.linear, x) + self.constant
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match &self.hessian {
            Some(h) => add(&h.mul_vec(x), &self.linear),
            None => self.linear.clone(),
        }
    }

    /// `max_{x in X} |∇q(x)|_*`. The dual norm of an affine map is convex,
    /// so on polytopes the maximum sits at a vertex; otherwise an interval
    /// bound over the enclosing box is used.
    pub fn lipschitz_over(&self, set: &FeasibleSet, norm: NormKind) -> f64 {
        if self.hessian.is_none() {
            return norm.dual_norm(&self.linear);
        }
        if let Some(vs) = set.vertices() {
            return vs.iter().map(|v| norm.dual_norm(&self.gradient(v))).fold(0.0, f64::max);
        }
        let (lo, hi) = bounding_box(set);
        let h = self.hessian.as_ref().expect("checked above");
        let n = self.dim();
        let mid: Vec<f64> = lo.iter().zip(&hi).map(|(l, u)| 0.5 * (l + u)).collect();
        let half: Vec<f64> = lo.iter().zip(&hi).map(|(l, u)| 0.5 * (u - l)).collect();
        let g_mid = self.gradient(&mid);
        let bound: Vec<f64> = (0..n)
            .map(|i| g_mid[i].abs() + (0..n).map(|j| h.get(i, j).abs() * half[j]).sum::<f64>())
            .collect();
        norm.dual_norm(&bound)
    }

    /// Lipschitz constant of the gradient w.r.t. the setup norm.
    pub fn gradient_lipschitz(&self, norm: NormKind) -> f64 {
        match (&self.hessian, norm) {
            (None, _) => 0.0,
            (Some(h), NormKind::L2) => h.max_abs_row_sum(),
            (Some(h), NormKind::L1) => h.max_abs(),
        }
    }
}

fn bounding_box(set: &FeasibleSet) -> (Vec<f64>, Vec<f64>) {
    match set {
        FeasibleSet::Box { lower, upper } => (lower.clone(), upper.clone()),
        FeasibleSet::Simplex { dim } => (vec![0.0; *dim], vec![1.0; *dim]),
        FeasibleSet::BallIntersection { base, center, radius_sq } => {
            let (lo, hi) = bounding_box(base);
            let r = radius_sq.sqrt();
            (
                lo.iter().zip(center).map(|(l, c)| l.max(c - r)).collect(),
                hi.iter().zip(center).map(|(u, c)| u.min(c + r)).collect(),
            )
        }
    }
}

/// `max_i q_i(x)` over quadratic parts. The subgradient returned at `x` is
/// the gradient of the lowest-index part attaining the maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointwiseMax {
    parts: Vec<Quadratic>,
}

impl PointwiseMax {
    pub fn new(parts: Vec<Quadratic>) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("a max-function needs at least one part".into()))?;
        let n = first.dim();
        for p in &parts {
            check_dim(n, p.dim())?;
            p.validate()?;
        }
        Ok(Self { parts })
    }

    pub fn single(q: Quadratic) -> Self {
        Self { parts: vec![q] }
    }

    pub fn parts(&self) -> &[Quadratic] {
        &self.parts
    }

    pub fn dim(&self) -> usize {
        self.parts[0].dim()
    }

    /// `(max value, index of the first part attaining it)`.
    pub fn value_with_active(&self, x: &[f64]) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, p) in self.parts.iter().enumerate() {
            let v = p.value(x);
            if v > best.0 {
                best = (v, i);
            }
        }
        best
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.value_with_active(x).0
    }

    pub fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        let (_, i) = self.value_with_active(x);
        self.parts[i].gradient(x)
    }

    pub fn lipschitz_over(&self, set: &FeasibleSet, norm: NormKind) -> f64 {
        self.parts.iter().map(|p| p.lipschitz_over(set, norm)).fold(0.0, f64::max)
    }

    pub fn is_affine(&self) -> bool {
        self.parts.iter().all(Quadratic::is_affine)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn active_index_and_ties() {
        let g = PointwiseMax::new(vec![
            Quadratic::affine(vec![0.0, 0.0], -1.0),
            Quadratic::affine(vec![0.0, 0.0], -2.0),
        ])
        .unwrap();
        assert_eq!(g.value_with_active(&[0.3, 0.7]), (-1.0, 0));

        let tie = PointwiseMax::new(vec![
            Quadratic::affine(vec![0.0, 0.0], 0.0),
            Quadratic::affine(vec![0.0, 0.0], 0.0),
        ])
        .unwrap();
        assert_eq!(tie.value_with_active(&[0.3, 0.7]), (0.0, 0));

        let single = PointwiseMax::single(Quadratic::affine(vec![1.0, 2.0], 0.5));
        assert_eq!(single.value_with_active(&[1.0, 1.0]), (3.5, 0));
    }

    #[test]
    fn subgradient_follows_active_part() {
        let g = PointwiseMax::new(vec![
            Quadratic::affine(vec![-1.0, 0.0], 0.5),
            Quadratic::affine(vec![0.0, -1.0], 0.5),
        ])
        .unwrap();
        assert_eq!(g.subgradient(&[0.2, 0.4]), vec![-1.0, 0.0]);
        assert_eq!(g.subgradient(&[0.4, 0.2]), vec![0.0, -1.0]);
    }

    #[test]
    fn lipschitz_on_simplex_and_box() {
        let q = Quadratic::new(Matrix::diagonal(&[2.0, 1.0]), vec![0.0, 0.0], 0.0).unwrap();
        assert_eq!(q.lipschitz_over(&FeasibleSet::simplex(2), NormKind::L1), 2.0);
        let b = FeasibleSet::unit_box(2);
        assert!((q.lipschitz_over(&b, NormKind::L2) - 5f64.sqrt()).abs() < 1e-15);
        let ball = b.clone().intersect_ball(vec![0.5, 0.5], 0.01);
        let lb = q.lipschitz_over(&ball, NormKind::L2);
        assert!(lb >= (1.2f64.powi(2) + 0.6f64.powi(2)).sqrt() - 1e-12 && lb <= 5f64.sqrt());
    }

    #[test]
    fn empty_max_rejected() {
        assert!(PointwiseMax::new(vec![]).is_err());
        assert!(PointwiseMax::new(vec![Quadratic::affine(vec![1.0], 0.0), Quadratic::affine(vec![1.0, 2.0], 0.0)])
            .is_err());
    }
}
