//! Weighted inner products, orthogonal projection, interpolation and error
//! norms for the weight `omega^{alpha,beta,lambda}(x) = lambda (1-x^lambda)^alpha x^((beta+1)lambda-1)`.
//!
//! Integrals are always taken in `z = x^lambda`, where the weight becomes the
//! classical `(1-z)^alpha z^beta` and the Gauss–Jacobi rule absorbs it exactly.

use thiserror::Error;

use crate::fractional_basis::{
    frac_jacobi_eval, lagrange_eval, pow_inv_lambda, BasisConfig, BasisConstants, BasisError,
    FractionalBasis,
};
use crate::special_functions::{gauss_jacobi_rule, QuadratureRule, SpecialError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ApproxError {
    #[error("quadrature order {got} too low, need at least {need}")]
    QuadOrderTooLow { got: usize, need: usize },
    #[error("error grid must have at least {need} points, got {got}")]
    GridTooSmall { got: usize, need: usize },
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Basis(#[from] BasisError),
}

/// Minimum grid size for L∞ sampling.
pub const MIN_ERROR_GRID: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedNormSpec {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub quad_order: usize,
}

impl WeightedNormSpec {
    pub fn new(alpha: f64, beta: f64, lambda: f64, quad_order: usize) -> Self {
        Self {
            alpha,
            beta,
            lambda,
            quad_order,
        }
    }

    /// Default order `2n + 32` for norms of degree-`n` objects.
    pub fn for_degree(alpha: f64, beta: f64, lambda: f64, n: usize) -> Self {
        Self::new(alpha, beta, lambda, 2 * n + 32)
    }

    pub fn build(&self) -> Result<WeightedNorm, ApproxError> {
        WeightedNorm::new(*self)
    }
}

/// A [`WeightedNormSpec`] with its quadrature rule already built, plus the
/// rule's nodes mapped back to `x`.
#[derive(Debug, Clone)]
pub struct WeightedNorm {
    pub spec: WeightedNormSpec,
    rule: QuadratureRule,
    x_points: Vec<f64>,
}

impl WeightedNorm {
    pub fn new(spec: WeightedNormSpec) -> Result<Self, ApproxError> {
        let rule = gauss_jacobi_rule(spec.alpha, spec.beta, spec.quad_order)?;
        let x_points = rule
            .nodes
            .iter()
            .map(|&z| pow_inv_lambda(z, spec.lambda))
            .collect();
        Ok(Self {
            spec,
            rule,
            x_points,
        })
    }

    pub fn inner_product<F, G>(&self, f: F, g: G) -> f64
    where
        F: Fn(f64) -> f64,
        G: Fn(f64) -> f64,
    {
        self.x_points
            .iter()
            .zip(&self.rule.weights)
            .map(|(&x, &w)| w * f(x) * g(x))
            .sum()
    }

    pub fn norm<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.x_points
            .iter()
            .zip(&self.rule.weights)
            .map(|(&x, &w)| w * f(x).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Points in `x` at which the integrand is sampled.
    pub fn x_points(&self) -> &[f64] {
        &self.x_points
    }
}

/// `(f, g)_{omega^{alpha,beta,lambda}}`.
pub fn weighted_inner_product<F, G>(f: F, g: G, spec: &WeightedNormSpec) -> Result<f64, ApproxError>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    Ok(spec.build()?.inner_product(f, g))
}

/// Coefficients of the orthogonal projection of `f` onto the span of
/// `J_0, ..., J_n` in the family described by `spec`.
pub fn project<F: Fn(f64) -> f64>(
    f: F,
    n: usize,
    spec: &WeightedNormSpec,
) -> Result<Vec<f64>, ApproxError> {
    let need = n + 20;
    if spec.quad_order < need {
        return Err(ApproxError::QuadOrderTooLow {
            got: spec.quad_order,
            need,
        });
    }
    let norm = spec.build()?;
    let cfg = BasisConfig::new(spec.alpha, spec.beta, spec.lambda, n)?;
    let consts = BasisConstants::new(spec.alpha, spec.beta);
    let fx: Vec<f64> = norm.x_points.iter().map(|&x| f(x)).collect();
    (0..=n)
        .map(|k| {
            let ip: f64 = norm
                .x_points
                .iter()
                .zip(&norm.rule.weights)
                .zip(&fx)
                .map(|((&x, &w), &fv)| w * fv * frac_jacobi_eval(&cfg, k, x))
                .sum();
            Ok(ip / consts.gamma_hat(k)?)
        })
        .collect()
}

/// Evaluates `Σ_k coeffs[k] J_k^{alpha,beta,lambda}(x)`.
pub fn eval_expansion(coeffs: &[f64], alpha: f64, beta: f64, lambda: f64, x: f64) -> f64 {
    let cfg = BasisConfig {
        alpha,
        beta,
        lambda,
        n: coeffs.len().saturating_sub(1),
    };
    coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c * frac_jacobi_eval(&cfg, k, x))
        .sum()
}

/// Nodal values `f(x_j)` defining the interpolant `I_{N,lambda} f`.
pub fn interpolate<F: Fn(f64) -> f64>(f: F, basis: &FractionalBasis) -> Vec<f64> {
    basis.x_nodes.iter().map(|&x| f(x)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub linf: f64,
    pub l2w: f64,
}

/// Maximum and weighted L² norms of `u_approx - u_ref`.
///
/// The maximum is taken over `grid_size` equispaced points of `[0, 1]`
/// (both endpoints included) together with `extra_points`, typically the
/// collocation nodes.
pub fn error_norms<A, R>(
    u_approx: A,
    u_ref: R,
    spec: &WeightedNormSpec,
    grid_size: usize,
    extra_points: &[f64],
) -> Result<ErrorNorms, ApproxError>
where
    A: Fn(f64) -> f64,
    R: Fn(f64) -> f64,
{
    if grid_size < MIN_ERROR_GRID {
        return Err(ApproxError::GridTooSmall {
            got: grid_size,
            need: MIN_ERROR_GRID,
        });
    }
    let diff = |x: f64| u_approx(x) - u_ref(x);
    let step = 1.0 / (grid_size - 1) as f64;
    let grid_max = (0..grid_size)
        .map(|k| {
            if k + 1 == grid_size {
                1.0
            } else {
                k as f64 * step
            }
        })
        .chain(extra_points.iter().copied())
        .map(|x| diff(x).abs())
        .fold(0.0, nan_max);
    let l2w = spec.build()?.norm(diff);
    Ok(ErrorNorms {
        linf: grid_max,
        l2w,
    })
}

// NaN-propagating max, so a non-finite error is never hidden
fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Interpolate `f` on `basis` and return the interpolant as a closure.
pub fn interpolant<'a, F: Fn(f64) -> f64>(
    f: F,
    basis: &'a FractionalBasis,
) -> impl Fn(f64) -> f64 + 'a {
    let values = interpolate(f, basis);
    move |x| lagrange_eval(basis, &values, x)
}
