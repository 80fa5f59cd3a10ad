use serde::{Deserialize, Serialize};

use super::functions::{PointwiseMax, Quadratic};
use super::oracle::{OracleSpec, StochasticOracle};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dist2_sq, dot, sub, Matrix};
use crate::prox::{FeasibleSet, Geometry, ProximalSetup};
use crate::rng::{self, Rng};

/// Interior samples tried when looking for a Slater point.
pub const SLATER_SAMPLES: usize = 10_000;
/// Sample pairs in the construction-time convexity audit.
pub const AUDIT_SAMPLES: usize = 1_000;
const AUDIT_SEED: u64 = 0x5eed_a0d1;

/// How a reference optimum was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    Grid,
    VertexEnumeration,
    Analytic,
}

/// A reference optimum with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub f_star: f64,
    pub x_star: Vec<f64>,
    pub method: OracleMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
}

impl OracleResult {
    pub fn analytic(f_star: f64, x_star: Vec<f64>) -> Self {
        Self { f_star, x_star, method: OracleMethod::Analytic, resolution: None }
    }
}

/// Constants for the smooth-objective accuracy bound of the general method:
/// `max_i |∇f_i(x*)|_*` and `max_i L_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessConstants {
    pub grad_norm_at_opt: f64,
    pub gradient_lipschitz: f64,
}

/// A convex function with its certified constants in the setup's norms.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientOracle {
    function: PointwiseMax,
    lipschitz: f64,
    mu: f64,
}

impl SubgradientOracle {
    pub fn function(&self) -> &PointwiseMax {
        &self.function
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.function.value(x)
    }

    pub fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        self.function.subgradient(x)
    }

    /// `max_X |∇f|_*`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Declared (and audited) strong-convexity modulus.
    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// `min { f(x) : x in X, g(x) = max_i g_i(x) <= 0 }` plus everything the
/// solvers need to know about it.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    setup: ProximalSetup,
    objective: SubgradientOracle,
    constraint: SubgradientOracle,
    stoch_objective: Option<StochasticOracle>,
    stoch_constraint: Option<StochasticOracle>,
    theta0_sq: f64,
    x0: Option<Vec<f64>>,
    r0_sq: Option<f64>,
    known_optimum: Option<OracleResult>,
    smoothness: Option<SmoothnessConstants>,
    slater_point: Vec<f64>,
}

impl ProblemInstance {
    pub fn builder(setup: ProximalSetup, objective: PointwiseMax, constraint: PointwiseMax) -> InstanceBuilder {
        InstanceBuilder {
            setup,
            objective,
            constraint,
            mu_f: 0.0,
            mu_g: 0.0,
            theta0_sq: None,
            start: None,
            known_optimum: None,
            smoothness: None,
            stoch_objective: None,
            stoch_constraint: None,
        }
    }

    pub fn setup(&self) -> &ProximalSetup {
        &self.setup
    }

    pub fn dim(&self) -> usize {
        self.setup.dim()
    }

    pub fn objective(&self) -> &SubgradientOracle {
        &self.objective
    }

    pub fn constraint(&self) -> &SubgradientOracle {
        &self.constraint
    }

    pub fn stoch_objective(&self) -> Option<&StochasticOracle> {
        self.stoch_objective.as_ref()
    }

    pub fn stoch_constraint(&self) -> Option<&StochasticOracle> {
        self.stoch_constraint.as_ref()
    }

    pub fn theta0_sq(&self) -> f64 {
        self.theta0_sq
    }

    /// Whether `Θ₀²` bounds `max_X d`, as the dual-certificate guarantee requires.
    pub fn theta0_bounds_prox(&self) -> bool {
        self.theta0_sq >= self.setup.max_prox_value() - 1e-12
    }

    /// Whether `Θ₀²` bounds `sup_{x,y} V[x](y)`, as the stochastic methods require.
    pub fn theta0_bounds_bregman(&self) -> bool {
        self.setup.bregman_diameter_sq().is_some_and(|b| self.theta0_sq >= b - 1e-12)
    }

    pub fn x0(&self) -> Option<&[f64]> {
        self.x0.as_deref()
    }

    pub fn r0_sq(&self) -> Option<f64> {
        self.r0_sq
    }

    pub fn known_optimum(&self) -> Option<&OracleResult> {
        self.known_optimum.as_ref()
    }

    pub fn slater_point(&self) -> &[f64] {
        &self.slater_point
    }

    pub fn f(&self, x: &[f64]) -> f64 {
        self.objective.value(x)
    }

    pub fn g(&self, x: &[f64]) -> f64 {
        self.constraint.value(x)
    }

    /// `(g(x), index of the active part)`; ties go to the lowest index.
    pub fn eval_constraint_with_active(&self, x: &[f64]) -> (f64, usize) {
        self.constraint.function.value_with_active(x)
    }

    /// Number of constraint parts `m`.
    pub fn num_constraints(&self) -> usize {
        self.constraint.function.parts().len()
    }

    /// User-supplied constants, or constants evaluated at the known optimum.
    pub fn smoothness(&self) -> Option<SmoothnessConstants> {
        if self.smoothness.is_some() {
            return self.smoothness;
        }
        let opt = self.known_optimum.as_ref()?;
        let norm = self.setup.norm_kind();
        let parts = self.objective.function.parts();
        Some(SmoothnessConstants {
            grad_norm_at_opt: parts.iter().map(|p| norm.dual_norm(&p.gradient(&opt.x_star))).fold(0.0, f64::max),
            gradient_lipschitz: parts.iter().map(|p| p.gradient_lipschitz(norm)).fold(0.0, f64::max),
        })
    }

    /// Builder pre-filled with this instance's data (constants are
    /// recomputed on build).
    pub fn to_builder(&self) -> InstanceBuilder {
        self.builder_with_setup(self.setup.clone()).theta0_sq(self.theta0_sq)
    }

    /// Copy with a different setup over the same functions (constants are
    /// recomputed for the new norm, `Θ₀²` reset to the setup default).
    pub fn with_setup(&self, setup: ProximalSetup) -> Result<Self> {
        self.builder_with_setup(setup).build()
    }

    fn builder_with_setup(&self, setup: ProximalSetup) -> InstanceBuilder {
        let mut b = Self::builder(setup, self.objective.function.clone(), self.constraint.function.clone())
            .mu(self.objective.mu, self.constraint.mu);
        if let (Some(x0), Some(r)) = (&self.x0, self.r0_sq) {
            b = b.start(x0.clone(), r);
        }
        if let Some(k) = &self.known_optimum {
            b = b.known_optimum(k.clone());
        }
        if let Some(s) = self.smoothness {
            b = b.smoothness(s);
        }
        if let Some(s) = &self.stoch_objective {
            b = b.stochastic_objective(s.spec().clone());
        }
        if let Some(s) = &self.stoch_constraint {
            b = b.stochastic_constraint(s.spec().clone());
        }
        b
    }
}

pub struct InstanceBuilder {
    setup: ProximalSetup,
    objective: PointwiseMax,
    constraint: PointwiseMax,
    mu_f: f64,
    mu_g: f64,
    theta0_sq: Option<f64>,
    start: Option<(Vec<f64>, f64)>,
    known_optimum: Option<OracleResult>,
    smoothness: Option<SmoothnessConstants>,
    stoch_objective: Option<OracleSpec>,
    stoch_constraint: Option<OracleSpec>,
}

impl InstanceBuilder {
    /// Declared strong-convexity moduli of `f` and `g` (audited on build).
    pub fn mu(mut self, mu_f: f64, mu_g: f64) -> Self {
        self.mu_f = mu_f;
        self.mu_g = mu_g;
        self
    }

    pub fn theta0_sq(mut self, theta0_sq: f64) -> Self {
        self.theta0_sq = Some(theta0_sq);
        self
    }

    /// Starting point `x0` with `|x0 - x*|² <= r0_sq`.
    pub fn start(mut self, x0: Vec<f64>, r0_sq: f64) -> Self {
        self.start = Some((x0, r0_sq));
        self
    }

    pub fn known_optimum(mut self, opt: OracleResult) -> Self {
        self.known_optimum = Some(opt);
        self
    }

    pub fn smoothness(mut self, s: SmoothnessConstants) -> Self {
        self.smoothness = Some(s);
        self
    }

    pub fn stochastic_objective(mut self, spec: OracleSpec) -> Self {
        self.stoch_objective = Some(spec);
        self
    }

    pub fn stochastic_constraint(mut self, spec: OracleSpec) -> Self {
        self.stoch_constraint = Some(spec);
        self
    }

    pub fn build(self) -> Result<ProblemInstance> {
        let setup = self.setup;
        let n = setup.dim();
        check_dim(n, self.objective.dim())?;
        check_dim(n, self.constraint.dim())?;
        for mu in [self.mu_f, self.mu_g] {
            if !(mu.is_finite() && mu >= 0.0) {
                return Err(Error::InvalidArgument(format!("strong-convexity modulus must be >= 0, got {mu}")));
            }
        }
        let theta0_sq = self.theta0_sq.unwrap_or_else(|| setup.theta0_sq_default());
        if !(theta0_sq.is_finite() && theta0_sq > 0.0) {
            return Err(Error::InvalidArgument(format!("theta0_sq must be positive, got {theta0_sq}")));
        }

        let norm = setup.norm_kind();
        let set = setup.set();
        let objective = SubgradientOracle {
            lipschitz: self.objective.lipschitz_over(set, norm),
            function: self.objective,
            mu: self.mu_f,
        };
        let constraint = SubgradientOracle {
            lipschitz: self.constraint.lipschitz_over(set, norm),
            function: self.constraint,
            mu: self.mu_g,
        };

        let mut audit_rng = rng::from_seed(AUDIT_SEED);
        audit_subgradient_inequality(&objective, &setup, AUDIT_SAMPLES, &mut audit_rng)
            .map_err(|e| Error::InvalidArgument(format!("objective: {e}")))?;
        audit_subgradient_inequality(&constraint, &setup, AUDIT_SAMPLES, &mut audit_rng)
            .map_err(|e| Error::InvalidArgument(format!("constraint: {e}")))?;

        let slater_point = find_slater_point(&setup, &constraint.function)?;

        let (x0, r0_sq) = match self.start {
            Some((x0, r0_sq)) => {
                check_dim(n, x0.len())?;
                if !set.contains(&x0) {
                    return Err(Error::InvalidArgument("x0 must lie in the feasible set".into()));
                }
                if !(r0_sq.is_finite() && r0_sq > 0.0) {
                    return Err(Error::InvalidArgument(format!("r0_sq must be positive, got {r0_sq}")));
                }
                if let Some(opt) = &self.known_optimum {
                    let d = dist2_sq(&x0, &opt.x_star);
                    if d > r0_sq + 1e-12 {
                        return Err(Error::InvalidArgument(format!(
                            "|x0 - x*|² = {d} exceeds r0_sq = {r0_sq}"
                        )));
                    }
                }
                (Some(x0), Some(r0_sq))
            }
            None => (None, None),
        };
        if let Some(opt) = &self.known_optimum {
            check_dim(n, opt.x_star.len())?;
        }

        let stoch_objective = self
            .stoch_objective
            .map(|s| StochasticOracle::build(&s, &objective.function, set, norm))
            .transpose()?;
        let stoch_constraint = self
            .stoch_constraint
            .map(|s| StochasticOracle::build(&s, &constraint.function, set, norm))
            .transpose()?;

        Ok(ProblemInstance {
            setup,
            objective,
            constraint,
            stoch_objective,
            stoch_constraint,
            theta0_sq,
            x0,
            r0_sq,
            known_optimum: self.known_optimum,
            smoothness: self.smoothness,
            slater_point,
        })
    }
}

fn find_slater_point(setup: &ProximalSetup, g: &PointwiseMax) -> Result<Vec<f64>> {
    let set = setup.set();
    for x in [setup.prox_center(), set.natural_center()] {
        if g.value(&x) < 0.0 {
            return Ok(x);
        }
    }
    let mut r = rng::from_seed(AUDIT_SEED ^ 0x51a7e5);
    for _ in 0..SLATER_SAMPLES {
        let x = set.sample_interior(&mut r);
        if g.value(&x) < 0.0 {
            return Ok(x);
        }
    }
    Err(Error::NoSlaterPoint { samples: SLATER_SAMPLES })
}

/// Checks `f(y) >= f(x) + <∇f(x), y - x> + μ/2 |y - x|² - 1e-9` and
/// `|∇f(x)|_* <= M + 1e-12` on random pairs from the feasible set.
pub fn audit_subgradient_inequality(
    oracle: &SubgradientOracle,
    setup: &ProximalSetup,
    samples: usize,
    rng: &mut Rng,
) -> std::result::Result<(), String> {
    let set = setup.set();
    let norm = setup.norm_kind();
    for _ in 0..samples {
        let x = set.sample_interior(rng);
        let y = set.sample_interior(rng);
        let gx = oracle.subgradient(&x);
        let d = sub(&y, &x);
        let lower = oracle.value(&x) + dot(&gx, &d) + 0.5 * oracle.mu * norm.norm(&d).powi(2);
        let fy = oracle.value(&y);
        if fy < lower - 1e-9 {
            return Err(format!(
                "subgradient inequality (mu = {}) fails: f(y) = {fy} < {lower} at x = {x:?}, y = {y:?}",
                oracle.mu
            ));
        }
        let gn = norm.dual_norm(&gx);
        if gn > oracle.lipschitz + 1e-12 {
            return Err(format!("subgradient norm {gn} exceeds Lipschitz bound {}", oracle.lipschitz));
        }
    }
    Ok(())
}

/// `f(x) = <c, x>`, `g_i(x) = <c_i, x> + b_i`. When the feasible set is a
/// small polytope the exact optimum is attached (vertex enumeration).
pub fn make_linear_max_problem(
    c: Vec<f64>,
    constraint_vectors: Vec<Vec<f64>>,
    offsets: Vec<f64>,
    setup: ProximalSetup,
) -> Result<ProblemInstance> {
    if constraint_vectors.len() != offsets.len() {
        return Err(Error::InvalidArgument(format!(
            "{} constraint vectors but {} offsets",
            constraint_vectors.len(),
            offsets.len()
        )));
    }
    let objective = PointwiseMax::single(Quadratic::affine(c, 0.0));
    let constraint = PointwiseMax::new(
        constraint_vectors.into_iter().zip(offsets).map(|(ci, bi)| Quadratic::affine(ci, bi)).collect(),
    )?;
    let known = crate::verify::vertex_optimum(&objective, &constraint, setup.set()).ok();
    let mut b = ProblemInstance::builder(setup, objective, constraint);
    if let Some(k) = known {
        b = b.known_optimum(k);
    }
    b.build()
}

/// `f(x) = ½<Ax, x>` (A symmetrized) and `g(x) = max_i <c_i, x>` on the
/// simplex, with the column-sampling stochastic objective installed and an
/// exact stochastic constraint oracle. For Euclidean setups `Θ₀²` is the
/// Bregman diameter `sup V[x](y)`, as the stochastic methods require.
pub fn make_quadratic_simplex_problem(
    a: Matrix,
    constraint_vectors: Vec<Vec<f64>>,
    setup: ProximalSetup,
) -> Result<ProblemInstance> {
    if !matches!(setup.set(), FeasibleSet::Simplex { .. }) {
        return Err(Error::Unsupported("the quadratic example lives on the simplex".into()));
    }
    let n = a.dim();
    let objective = PointwiseMax::single(Quadratic::new(a, vec![0.0; n], 0.0)?);
    let constraint =
        PointwiseMax::new(constraint_vectors.into_iter().map(|ci| Quadratic::affine(ci, 0.0)).collect())?;
    let theta0_sq = setup.bregman_diameter_sq().unwrap_or_else(|| setup.theta0_sq_default());
    ProblemInstance::builder(setup, objective, constraint)
        .theta0_sq(theta0_sq)
        .stochastic_objective(OracleSpec::ColumnSampling)
        .stochastic_constraint(OracleSpec::Exact)
        .build()
}
