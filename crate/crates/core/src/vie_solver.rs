//! Fractional Jacobi spectral collocation for
//! `u(x) = g(x) + ∫₀ˣ (x - s)^(-mu) K(x, s) u(s) ds` on `[0, 1]`.
//!
//! At each collocation point `x_i = z_i^(1/lambda)` the integral is rewritten
//! with `s = x_i θ^(1/lambda)`, which turns it into a Jacobi-weighted integral
//! in `θ` with weight `(1-θ)^(-mu) θ^(1/lambda-1)`:
//!
//! ```text
//! (K u)(x_i) = ∫₀¹ (1-θ)^(-mu) θ^(1/lambda-1) K̄(x_i, θ) u(x_i θ^(1/lambda)) dθ,
//! K̄(x_i, θ)  = x_i^(1-mu)/lambda · ((1-θ^(1/lambda))/(1-θ))^(-mu) · K(x_i, x_i θ^(1/lambda)).
//! ```
//!
//! Since `(x_i θ^(1/lambda))^lambda = z_i θ`, the Lagrange basis at the
//! quadrature points is just the classical barycentric basis at `z_i θ_q`.

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::fractional_basis::{
    lagrange_eval, pow_inv_lambda, BasisConfig, BasisError, FractionalBasis,
};
use crate::linalg::{condition_estimate_1, solve_refined, DenseMatrix, LinalgError, LuFactors};
use crate::special_functions::{gauss_jacobi_rule, QuadratureRule, SpecialError};

/// Failure reported by a user-supplied function.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{0}")]
pub struct FnError(pub String);

impl FnError {
    pub fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

pub type KernelFn = Arc<dyn Fn(f64, f64) -> Result<f64, FnError> + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(f64) -> Result<f64, FnError> + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("mu must lie in (0, 1), got {0}")]
    InvalidMu(f64),
    #[error("kernel is not finite at (x, s) = ({x}, {s})")]
    KernelNotFinite { x: f64, s: f64 },
    #[error("theta must lie in (0, 1), got {0}")]
    ThetaOutOfRange(f64),
    #[error("non-finite matrix contribution at row {row}, quadrature point {quad}")]
    NonFiniteEntry { row: usize, quad: usize },
    #[error("{what} evaluation failed at x = {x}: {source}")]
    Function {
        what: &'static str,
        x: f64,
        #[source]
        source: FnError,
    },
    #[error("residual check needs at least {need} quadrature points, got {got}")]
    QuadOrderTooLow { got: usize, need: usize },
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Exact solution with an explicit value at `x = 0` for removable forms such
/// as `x^(-mu) sin x`.
#[derive(Clone)]
pub struct ExactSolution {
    f: ScalarFn,
    at_zero: Option<f64>,
}

impl ExactSolution {
    pub fn new(f: ScalarFn, at_zero: Option<f64>) -> Self {
        Self { f, at_zero }
    }

    pub fn from_fn<F>(f: F, at_zero: Option<f64>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(Arc::new(move |x| Ok(f(x))), at_zero)
    }

    pub fn eval(&self, x: f64) -> Result<f64, FnError> {
        match (x == 0.0, self.at_zero) {
            (true, Some(v)) => Ok(v),
            _ => (self.f)(x),
        }
    }
}

impl fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExactSolution")
            .field("at_zero", &self.at_zero)
            .finish_non_exhaustive()
    }
}

#[derive(Clone)]
pub struct VieProblem {
    pub mu: f64,
    pub kernel: KernelFn,
    pub source: ScalarFn,
    pub exact: Option<ExactSolution>,
}

impl fmt::Debug for VieProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VieProblem")
            .field("mu", &self.mu)
            .field("exact", &self.exact)
            .finish_non_exhaustive()
    }
}

/// Low-discrepancy points in `[0, 1)²` (additive recurrence on the plastic number).
pub(crate) fn quasi_random_2d(k: usize) -> (f64, f64) {
    const G: f64 = 1.324_717_957_244_746;
    let a1 = 1.0 / G;
    let a2 = 1.0 / (G * G);
    let kf = k as f64 + 1.0;
    ((0.5 + a1 * kf).fract(), (0.5 + a2 * kf).fract())
}

const KERNEL_SAMPLES: usize = 100;

impl VieProblem {
    pub fn new(mu: f64, kernel: KernelFn, source: ScalarFn) -> Result<Self, SolverError> {
        if !(mu > 0.0 && mu < 1.0) {
            return Err(SolverError::InvalidMu(mu));
        }
        let problem = Self {
            mu,
            kernel,
            source,
            exact: None,
        };
        // sample the closed triangle, corners included
        let corners = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)];
        let samples = corners.into_iter().chain((0..KERNEL_SAMPLES).map(|k| {
            let (u, v) = quasi_random_2d(k);
            (u.max(v), u.min(v))
        }));
        for (x, s) in samples {
            match (problem.kernel)(x, s) {
                Ok(v) if v.is_finite() => {}
                _ => return Err(SolverError::KernelNotFinite { x, s }),
            }
        }
        Ok(problem)
    }

    /// Convenience constructor for infallible closures.
    pub fn from_fns<K, G>(mu: f64, kernel: K, source: G) -> Result<Self, SolverError>
    where
        K: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(
            mu,
            Arc::new(move |x, s| Ok(kernel(x, s))),
            Arc::new(move |x| Ok(source(x))),
        )
    }

    pub fn with_exact(mut self, exact: ExactSolution) -> Self {
        self.exact = Some(exact);
        self
    }

    pub fn source_at(&self, x: f64) -> Result<f64, SolverError> {
        (self.source)(x).map_err(|source| SolverError::Function {
            what: "source",
            x,
            source,
        })
    }

    pub fn kernel_at(&self, x: f64, s: f64) -> Result<f64, SolverError> {
        (self.kernel)(x, s).map_err(|source| SolverError::Function {
            what: "kernel",
            x,
            source,
        })
    }
}

/// Collocation basis plus the `(-mu, 1/lambda - 1)` rule used for the integral term.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub basis: FractionalBasis,
    pub quad: QuadratureRule,
}

impl Discretization {
    pub fn new(mu: f64, cfg: BasisConfig) -> Result<Self, SolverError> {
        Self::with_quad_points(mu, cfg, cfg.n + 1)
    }

    pub(crate) fn with_quad_points(
        mu: f64,
        cfg: BasisConfig,
        npoints: usize,
    ) -> Result<Self, SolverError> {
        if !(mu > 0.0 && mu < 1.0) {
            return Err(SolverError::InvalidMu(mu));
        }
        let basis = FractionalBasis::new(cfg)?;
        let quad = gauss_jacobi_rule(-mu, 1.0 / cfg.lambda - 1.0, npoints)?;
        Ok(Self { basis, quad })
    }
}

/// `((1 - θ^(1/lambda)) / (1 - θ))^(-mu)`, evaluated in log space.
pub fn ratio_factor(theta: f64, lambda: f64, mu: f64) -> f64 {
    if lambda == 1.0 {
        return 1.0;
    }
    let log_num = (-(theta.ln() / lambda).exp_m1()).ln();
    let log_den = (-theta).ln_1p();
    (-mu * (log_num - log_den)).exp()
}

/// Transformed kernel `K̄(x_i, τ_i(θ))`.
pub fn kbar(problem: &VieProblem, x_i: f64, theta: f64, lambda: f64) -> Result<f64, SolverError> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(SolverError::ThetaOutOfRange(theta));
    }
    let s = x_i * pow_inv_lambda(theta, lambda);
    let k = problem.kernel_at(x_i, s)?;
    Ok(x_i.powf(1.0 - problem.mu) / lambda * ratio_factor(theta, lambda, problem.mu) * k)
}

/// Dense system `(I - M) u = g(x_i)`.
#[derive(Debug, Clone)]
pub struct CollocationSystem {
    pub matrix: DenseMatrix,
    pub rhs: Vec<f64>,
    /// 1-norm condition estimate; infinite when the matrix is singular.
    pub condition_estimate: f64,
}

impl CollocationSystem {
    pub fn new(matrix: DenseMatrix, rhs: Vec<f64>) -> Self {
        let condition_estimate = match LuFactors::factor(&matrix) {
            Ok(lu) => condition_estimate_1(&matrix, &lu),
            Err(_) => f64::INFINITY,
        };
        Self {
            matrix,
            rhs,
            condition_estimate,
        }
    }
}

/// Integral-operator matrix `M[i][j] = Σ_q K̄(x_i, θ_q) h_j(z_i θ_q) ω_q`.
pub fn integral_matrix(
    problem: &VieProblem,
    disc: &Discretization,
) -> Result<DenseMatrix, SolverError> {
    let basis = &disc.basis;
    let n = basis.len();
    let lambda = basis.lambda();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (x_i, z_i) = (basis.x_nodes[i], basis.z_nodes[i]);
            let mut row = vec![0.0; n];
            let mut h = vec![0.0; n];
            for (q, (theta, w)) in disc.quad.iter().enumerate() {
                let c = kbar(problem, x_i, theta, lambda)? * w;
                if !c.is_finite() {
                    return Err(SolverError::NonFiniteEntry { row: i, quad: q });
                }
                basis.cardinals_z(z_i * theta, &mut h);
                for (r, hj) in row.iter_mut().zip(&h) {
                    *r += c * hj;
                }
            }
            Ok(row)
        })
        .collect::<Result<_, _>>()?;
    Ok(DenseMatrix::from_rows(rows)?)
}

pub fn assemble(
    problem: &VieProblem,
    disc: &Discretization,
) -> Result<CollocationSystem, SolverError> {
    let mut a = integral_matrix(problem, disc)?;
    let n = a.rows();
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = if i == j { 1.0 } else { 0.0 } - a[(i, j)];
        }
    }
    let rhs = disc
        .basis
        .x_nodes
        .iter()
        .map(|&x| problem.source_at(x))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CollocationSystem::new(a, rhs))
}

/// Partial-pivot LU plus one refinement step.
pub fn lu_solve(system: &CollocationSystem) -> Result<Vec<f64>, SolverError> {
    let lu = LuFactors::factor(&system.matrix)?;
    Ok(solve_refined(&system.matrix, &lu, &system.rhs))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub assemble_ms: f64,
    pub solve_ms: f64,
    pub condition_estimate: f64,
}

/// Discrete solution `u_N(x) = Σ_i u_i h_{i,lambda}(x)`.
#[derive(Debug, Clone)]
pub struct Solution {
    pub nodal_values: Vec<f64>,
    pub basis: FractionalBasis,
    pub diagnostics: Diagnostics,
}

impl Solution {
    pub fn evaluate(&self, x: f64) -> f64 {
        lagrange_eval(&self.basis, &self.nodal_values, x)
    }

    pub fn n(&self) -> usize {
        self.basis.config.n
    }
}

pub fn solve(
    problem: &VieProblem,
    alpha: f64,
    beta: f64,
    lambda: f64,
    n: usize,
) -> Result<Solution, SolverError> {
    solve_with(problem, BasisConfig::new(alpha, beta, lambda, n)?)
}

pub fn solve_with(problem: &VieProblem, cfg: BasisConfig) -> Result<Solution, SolverError> {
    let disc = Discretization::new(problem.mu, cfg)?;
    let t0 = Instant::now();
    let system = assemble(problem, &disc)?;
    let assemble_ms = t0.elapsed().as_secs_f64() * 1e3;
    let t1 = Instant::now();
    let nodal_values = lu_solve(&system)?;
    let solve_ms = t1.elapsed().as_secs_f64() * 1e3;
    Ok(Solution {
        nodal_values,
        basis: disc.basis,
        diagnostics: Diagnostics {
            assemble_ms,
            solve_ms,
            condition_estimate: system.condition_estimate,
        },
    })
}

/// Maximum residual of the continuous equation at `n_check` quasi-random
/// points, with the integral taken by a fresh `quad_order`-point rule.
pub fn residual(
    solution: &Solution,
    problem: &VieProblem,
    n_check: usize,
    quad_order: usize,
) -> Result<f64, SolverError> {
    let need = 4 * (solution.basis.len());
    if quad_order < need {
        return Err(SolverError::QuadOrderTooLow {
            got: quad_order,
            need,
        });
    }
    let lambda = solution.basis.lambda();
    let rule = gauss_jacobi_rule(-problem.mu, 1.0 / lambda - 1.0, quad_order)?;
    let mut worst: f64 = 0.0;
    for k in 0..n_check {
        // keep away from x = 0 where x^(1-mu) loses meaning for the check
        let x = 1e-3 + (1.0 - 1e-3) * quasi_random_2d(k + 7919).0;
        let mut integral = 0.0;
        for (theta, w) in rule.iter() {
            let s = x * pow_inv_lambda(theta, lambda);
            integral += kbar(problem, x, theta, lambda)? * solution.evaluate(s) * w;
        }
        let r = solution.evaluate(x) - problem.source_at(x)? - integral;
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_functions::beta_fn;

    fn const_problem(mu: f64) -> VieProblem {
        // u ≡ 1 with K ≡ 1
        VieProblem::from_fns(mu, |_, _| 1.0, move |x| 1.0 - x.powf(1.0 - mu) / (1.0 - mu))
            .unwrap()
            .with_exact(ExactSolution::from_fn(|_| 1.0, None))
    }

    #[test]
    fn problem_validation() {
        assert!(matches!(
            VieProblem::from_fns(0.0, |_, _| 1.0, |_| 1.0),
            Err(SolverError::InvalidMu(_))
        ));
        assert!(matches!(
            VieProblem::from_fns(1.0, |_, _| 1.0, |_| 1.0),
            Err(SolverError::InvalidMu(_))
        ));
        assert!(matches!(
            VieProblem::from_fns(0.5, |x, s| 1.0 / (x - s), |_| 1.0),
            Err(SolverError::KernelNotFinite { .. })
        ));
    }

    #[test]
    fn ratio_factor_cases() {
        assert_eq!(ratio_factor(0.3, 1.0, 0.4), 1.0);
        // 1/λ = 2: (1-θ²)/(1-θ) = 1+θ
        for &t in &[0.01, 0.3, 0.9, 0.999] {
            let v = ratio_factor(t, 0.5, 0.3);
            assert!((v - (1.0 + t).powf(-0.3)).abs() < 1e-14);
        }
    }

    #[test]
    fn kbar_cases() {
        let p = VieProblem::from_fns(0.4, |_, _| 1.0, |_| 1.0).unwrap();
        let x: f64 = 0.37;
        assert!((kbar(&p, x, 0.2, 1.0).unwrap() - x.powf(0.6)).abs() < 1e-15);
        let v = kbar(&p, x, 0.2, 0.5).unwrap();
        assert!((v - 2.0 * x.powf(0.6) * 1.2f64.powf(-0.4)).abs() < 1e-14);
        assert!(kbar(&p, x, 0.0, 0.5).is_err());
        assert!(kbar(&p, x, 1.0, 0.5).is_err());
    }

    #[test]
    fn kbar_near_theta_one() {
        let mu = 2.0 / 3.0;
        let lam = 1.0 / 3.0;
        let p = VieProblem::from_fns(mu, |x, s| 1.0 + x * s, |_| 1.0).unwrap();
        let x: f64 = 0.42;
        let v = kbar(&p, x, 1.0 - 1e-12, lam).unwrap();
        let limit = x.powf(1.0 - mu) / lam * (1.0 / lam).powf(-mu) * (1.0 + x * x);
        assert!((v - limit).abs() <= 1e-6 * limit, "{v} {limit}");
    }

    #[test]
    fn zero_kernel_gives_identity_system() {
        let p = VieProblem::from_fns(0.3, |_, _| 0.0, |x| x.cos()).unwrap();
        let cfg = BasisConfig::new(-0.5, -0.5, 0.5, 6).unwrap();
        let disc = Discretization::new(p.mu, cfg).unwrap();
        let sys = assemble(&p, &disc).unwrap();
        assert_eq!(sys.matrix, DenseMatrix::identity(7));
        let sol = solve_with(&p, cfg).unwrap();
        for (u, x) in sol.nodal_values.iter().zip(&sol.basis.x_nodes) {
            assert_eq!(*u, x.cos());
        }
    }

    #[test]
    fn one_point_system_matches_closed_form() {
        // N = 0, K ≡ 1, λ = 1: single equation u₀ = g(x₀) + x₀^{1-μ} ω₀ u₀,
        // with the one-point (−μ, 0) rule weight ω₀ = B(1, 1-μ) = 1/(1-μ)
        let mu = 0.35;
        let p = VieProblem::from_fns(mu, |_, _| 1.0, |_| 2.0).unwrap();
        let cfg = BasisConfig::new(0.0, 0.0, 1.0, 0).unwrap();
        let disc = Discretization::new(mu, cfg).unwrap();
        let w0 = beta_fn(1.0, 1.0 - mu).unwrap();
        assert!((disc.quad.weights[0] - 1.0 / (1.0 - mu)).abs() < 1e-14);
        let x0 = disc.basis.x_nodes[0];
        assert!((x0 - 0.5).abs() < 1e-15);
        let sys = assemble(&p, &disc).unwrap();
        let expect = 1.0 - x0.powf(1.0 - mu) * w0;
        assert!((sys.matrix[(0, 0)] - expect).abs() < 1e-14);
        let u = lu_solve(&sys).unwrap();
        assert!((u[0] - 2.0 / expect).abs() < 1e-13);
    }

    #[test]
    fn manufactured_constant_solution() {
        let p = const_problem(0.5);
        let sol = solve(&p, -0.5, -0.5, 0.5, 16).unwrap();
        let err = (0..=1000)
            .map(|k| (sol.evaluate(k as f64 / 1000.0) - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-10, "{err}");
    }

    #[test]
    fn evaluate_at_nodes_is_exact() {
        let p = const_problem(0.3);
        let sol = solve(&p, -0.5, -0.5, 0.25, 9).unwrap();
        for (x, u) in sol.basis.x_nodes.iter().zip(&sol.nodal_values) {
            assert_eq!(sol.evaluate(*x), *u);
        }
    }

    #[test]
    fn residual_behaviour() {
        let p = const_problem(0.5);
        let mut sol = solve(&p, -0.5, -0.5, 0.5, 12).unwrap();
        let r = residual(&sol, &p, 50, 60).unwrap();
        assert!(r < 1e-10, "{r}");
        assert!(residual(&sol, &p, 50, 10).is_err());
        sol.nodal_values[5] += 1e-3;
        let r = residual(&sol, &p, 50, 60).unwrap();
        assert!(r >= 1e-4, "{r}");
    }

    #[test]
    fn residual_with_zero_kernel_is_interpolation_error() {
        let p = VieProblem::from_fns(0.5, |_, _| 0.0, |x| (5.0 * x).sin()).unwrap();
        let sol = solve(&p, -0.5, -0.5, 1.0, 6).unwrap();
        let r = residual(&sol, &p, 40, 40).unwrap();
        assert!(r > 0.0 && r < 1e-2, "{r}");
    }

    #[test]
    fn assembly_is_deterministic() {
        let p = VieProblem::from_fns(0.5, |x, s| (x - s).exp(), |_| 1.0).unwrap();
        let cfg = BasisConfig::new(-0.5, -0.5, 0.5, 20).unwrap();
        let disc = Discretization::new(p.mu, cfg).unwrap();
        let a = assemble(&p, &disc).unwrap();
        let b = assemble(&p, &disc).unwrap();
        assert_eq!(a.matrix, b.matrix);
    }

    #[test]
    fn failing_source_propagates() {
        let p = VieProblem::new(
            0.5,
            Arc::new(|_, _| Ok(1.0)),
            Arc::new(|x| {
                if x > 0.5 {
                    Err(FnError::new("boom"))
                } else {
                    Ok(1.0)
                }
            }),
        )
        .unwrap();
        let err = solve(&p, -0.5, -0.5, 1.0, 4).unwrap_err();
        assert!(matches!(err, SolverError::Function { what: "source", .. }));
    }

    #[test]
    fn non_finite_contribution_names_row_and_point() {
        // finite on the sampled triangle but blows up on x_0's quadrature points
        let p = VieProblem::new(
            0.5,
            Arc::new(|x, s| {
                if x < 0.05 && s > 0.0 {
                    Ok(f64::INFINITY)
                } else {
                    Ok(1.0)
                }
            }),
            Arc::new(|_| Ok(1.0)),
        )
        .unwrap();
        let err = solve(&p, -0.5, -0.5, 1.0, 8).unwrap_err();
        assert!(
            matches!(err, SolverError::NonFiniteEntry { row: 0, quad: 0 }),
            "{err:?}"
        );
    }
}
