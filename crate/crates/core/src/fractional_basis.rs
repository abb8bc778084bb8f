//! Fractional Jacobi polynomials `J_n^{alpha,beta,lambda}(x) = J_n^{alpha,beta}(2 x^lambda - 1)`,
//! the lambda-derivative `D_lambda = d/d(x^lambda)`, and the Lagrange basis on
//! the fractional Gauss points.
//!
//! All Lagrange work happens in `z = x^lambda`: the fractional cardinal
//! function `h_j(x)` equals the classical one evaluated at `x^lambda`, so the
//! basis is classical barycentric interpolation behind a change of variable.

use thiserror::Error;

use crate::special_functions::{beta_fn, gauss_jacobi_rule, jacobi_eval, ln_gamma, SpecialError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BasisError {
    #[error("invalid basis parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// Parameters of a fractional Jacobi family truncated at degree `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisConfig {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub n: usize,
}

impl BasisConfig {
    pub fn new(alpha: f64, beta: f64, lambda: f64, n: usize) -> Result<Self, BasisError> {
        if !(alpha > -1.0) || !alpha.is_finite() {
            return Err(BasisError::InvalidParameter {
                name: "alpha",
                value: alpha,
            });
        }
        if !(beta > -1.0) || !beta.is_finite() {
            return Err(BasisError::InvalidParameter {
                name: "beta",
                value: beta,
            });
        }
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(BasisError::InvalidParameter {
                name: "lambda",
                value: lambda,
            });
        }
        Ok(Self {
            alpha,
            beta,
            lambda,
            n,
        })
    }

    /// Same family with `alpha` and `beta` both raised by `k`.
    pub fn shifted(&self, k: usize) -> Self {
        Self {
            alpha: self.alpha + k as f64,
            beta: self.beta + k as f64,
            ..*self
        }
    }
}

/// `x^lambda` with an explicit zero branch.
#[inline]
pub fn pow_lambda(x: f64, lambda: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if lambda == 1.0 {
        x
    } else {
        (lambda * x.ln()).exp()
    }
}

/// Inverse map `z^(1/lambda)`.
#[inline]
pub fn pow_inv_lambda(z: f64, lambda: f64) -> f64 {
    if z == 0.0 {
        0.0
    } else if lambda == 1.0 {
        z
    } else {
        (z.ln() / lambda).exp()
    }
}

/// `J_deg^{alpha,beta,lambda}(x)`. The degree is not limited to `cfg.n`.
pub fn frac_jacobi_eval(cfg: &BasisConfig, deg: usize, x: f64) -> f64 {
    let t = 2.0 * pow_lambda(x, cfg.lambda) - 1.0;
    jacobi_eval(cfg.alpha, cfg.beta, deg, t).0
}

/// `d̂_{n,k} = Γ(n+k+alpha+beta+1)/Γ(n+alpha+beta+1)`, as a finite product.
pub fn d_hat(alpha: f64, beta: f64, n: usize, k: usize) -> f64 {
    let base = n as f64 + alpha + beta + 1.0;
    (0..k).map(|j| base + j as f64).product()
}

/// `D^k_lambda J_deg(x) = d̂_{deg,k} J^{alpha+k,beta+k,lambda}_{deg-k}(x)`; zero when `k > deg`.
pub fn frac_jacobi_lambda_deriv(cfg: &BasisConfig, deg: usize, k: usize, x: f64) -> f64 {
    if k > deg {
        return 0.0;
    }
    if k == 0 {
        return frac_jacobi_eval(cfg, deg, x);
    }
    d_hat(cfg.alpha, cfg.beta, deg, k) * frac_jacobi_eval(&cfg.shifted(k), deg - k, x)
}

/// Normalization constants of the family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisConstants {
    pub alpha: f64,
    pub beta: f64,
}

impl BasisConstants {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    /// Squared weighted norm `γ̂_n` of `J_n^{alpha,beta,lambda}`.
    pub fn gamma_hat(&self, n: usize) -> Result<f64, BasisError> {
        let (a, b) = (self.alpha, self.beta);
        if n == 0 {
            // closed form avoids the 0/0 at alpha + beta = -1
            return Ok(beta_fn(b + 1.0, a + 1.0)?);
        }
        let nf = n as f64;
        let denom = 2.0 * nf + a + b + 1.0;
        let ln = ln_gamma(nf + a + 1.0)? + ln_gamma(nf + b + 1.0)?
            - ln_gamma(nf + 1.0)?
            - ln_gamma(nf + a + b + 1.0)?;
        Ok(ln.exp() / denom)
    }

    /// Sturm–Liouville eigenvalue `σ_n = n (n + alpha + beta + 1)`.
    pub fn sigma(&self, n: usize) -> f64 {
        let nf = n as f64;
        nf * (nf + self.alpha + self.beta + 1.0)
    }

    pub fn d_hat(&self, n: usize, k: usize) -> f64 {
        d_hat(self.alpha, self.beta, n, k)
    }

    /// `ĥ_{n,k}`, the squared `omega^{alpha+k,beta+k,lambda}` norm of `D^k_lambda J_n`.
    pub fn h_hat(&self, n: usize, k: usize) -> Result<f64, BasisError> {
        if k > n {
            return Ok(0.0);
        }
        if k == 0 {
            return self.gamma_hat(n);
        }
        let (a, b) = (self.alpha, self.beta);
        let nf = n as f64;
        let denom = 2.0 * nf + a + b + 1.0;
        let ln = ln_gamma(nf + a + 1.0)?
            + ln_gamma(nf + b + 1.0)?
            + ln_gamma(nf + k as f64 + a + b + 1.0)?
            - ln_gamma((n - k) as f64 + 1.0)?
            - 2.0 * ln_gamma(nf + a + b + 1.0)?;
        Ok(ln.exp() / denom)
    }
}

/// Fractional Gauss points and barycentric weights for `h_{j,lambda}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalBasis {
    pub config: BasisConfig,
    /// Roots of the shifted Jacobi polynomial of degree `n + 1`, ascending.
    pub z_nodes: Vec<f64>,
    /// `z_nodes^(1/lambda)`.
    pub x_nodes: Vec<f64>,
    /// Barycentric weights for `z_nodes`, scaled to `max |w| = 1`.
    pub bary_weights: Vec<f64>,
}

impl FractionalBasis {
    pub fn new(config: BasisConfig) -> Result<Self, BasisError> {
        let rule = gauss_jacobi_rule(config.alpha, config.beta, config.n + 1)?;
        let z_nodes = rule.nodes;
        let x_nodes = z_nodes
            .iter()
            .map(|&z| pow_inv_lambda(z, config.lambda))
            .collect();
        let bary_weights = barycentric_weights(&z_nodes);
        Ok(Self {
            config,
            z_nodes,
            x_nodes,
            bary_weights,
        })
    }

    pub fn len(&self) -> usize {
        self.z_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z_nodes.is_empty()
    }

    pub fn lambda(&self) -> f64 {
        self.config.lambda
    }

    /// Interpolant through `(z_nodes, values)` evaluated at `z`.
    pub fn eval_z(&self, values: &[f64], z: f64) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&zj, &wj), &vj) in self.z_nodes.iter().zip(&self.bary_weights).zip(values) {
            let d = z - zj;
            if d.abs() <= 1e-300 {
                return vj;
            }
            let t = wj / d;
            num += t * vj;
            den += t;
        }
        num / den
    }

    /// Derivative with respect to `z` of the interpolant, away from the nodes.
    pub fn eval_z_derivative(&self, values: &[f64], z: f64) -> f64 {
        let p = self.eval_z(values, z);
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&zj, &wj), &vj) in self.z_nodes.iter().zip(&self.bary_weights).zip(values) {
            let d = z - zj;
            let t = wj / d;
            num += t * (p - vj) / d;
            den += t;
        }
        num / den
    }

    /// All cardinal functions `h_{j,1}(z)` written into `out`.
    pub fn cardinals_z(&self, z: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.len());
        if let Some(j) = self.z_nodes.iter().position(|&zj| (z - zj).abs() <= 1e-300) {
            out.fill(0.0);
            out[j] = 1.0;
            return;
        }
        let mut den = 0.0;
        for ((o, &zj), &wj) in out.iter_mut().zip(&self.z_nodes).zip(&self.bary_weights) {
            *o = wj / (z - zj);
            den += *o;
        }
        for o in out.iter_mut() {
            *o /= den;
        }
    }

    /// Lebesgue function `Σ_j |h_{j,1}(z)|`.
    pub fn lebesgue_function_z(&self, z: f64) -> f64 {
        let mut h = vec![0.0; self.len()];
        self.cardinals_z(z, &mut h);
        h.iter().map(|v| v.abs()).sum()
    }
}

pub fn build_fractional_basis(cfg: BasisConfig) -> Result<FractionalBasis, BasisError> {
    FractionalBasis::new(cfg)
}

/// Barycentric weights `w_j ∝ 1/Π_{i≠j}(z_j - z_i)`, accumulated as a log
/// magnitude plus sign and normalized to unit maximum modulus.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let logs: Vec<(f64, f64)> = nodes
        .iter()
        .enumerate()
        .map(|(j, &zj)| {
            let mut log_mag = 0.0;
            let mut sign = 1.0;
            for (i, &zi) in nodes.iter().enumerate() {
                if i != j {
                    let d = zj - zi;
                    log_mag -= d.abs().ln();
                    if d < 0.0 {
                        sign = -sign;
                    }
                }
            }
            (log_mag, sign)
        })
        .collect();
    let max_log = logs
        .iter()
        .map(|&(l, _)| l)
        .fold(f64::NEG_INFINITY, f64::max);
    logs.into_iter()
        .map(|(l, s)| s * (l - max_log).exp())
        .collect()
}

/// Second-form barycentric evaluation of the interpolant at `x`, via `z = x^lambda`.
///
/// At a collocation point the nodal value is returned as is; the round trip
/// `(z^(1/lambda))^lambda` need not reproduce `z` bit for bit.
pub fn lagrange_eval(basis: &FractionalBasis, nodal_values: &[f64], x: f64) -> f64 {
    if let Some(j) = basis.x_nodes.iter().position(|&xj| xj == x) {
        return nodal_values[j];
    }
    basis.eval_z(nodal_values, pow_lambda(x, basis.lambda()))
}

/// Maximum of the Lebesgue function over `grid_size` equispaced points of
/// `[0, 1]` in `z`. Independent of lambda.
pub fn lebesgue_constant(basis: &FractionalBasis, grid_size: usize) -> f64 {
    let m = grid_size.max(2);
    (0..m)
        .map(|k| basis.lebesgue_function_z(k as f64 / (m - 1) as f64))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_functions::gauss_jacobi_rule;
    use std::f64::consts::PI;

    fn cfg(alpha: f64, beta: f64, lambda: f64, n: usize) -> BasisConfig {
        BasisConfig::new(alpha, beta, lambda, n).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(BasisConfig::new(-1.0, 0.0, 0.5, 3).is_err());
        assert!(BasisConfig::new(0.0, -1.2, 0.5, 3).is_err());
        assert!(BasisConfig::new(0.0, 0.0, 0.0, 3).is_err());
        assert!(BasisConfig::new(0.0, 0.0, 1.5, 3).is_err());
        assert!(BasisConfig::new(0.0, 0.0, 1.0, 0).is_ok());
    }

    #[test]
    fn frac_eval_simple_cases() {
        let c = cfg(0.0, 0.0, 0.5, 4);
        assert_eq!(frac_jacobi_eval(&c, 0, 0.3), 1.0);
        assert!(frac_jacobi_eval(&c, 1, 0.25).abs() < 1e-15);
    }

    /// Representation formula
    /// J_n(x) = Γ(n+a+1)/(n!Γ(n+a+b+1)) Σ_k C(n,k) Γ(n+k+a+b+1)/Γ(k+a+1) (x^λ-1)^k.
    #[test]
    fn frac_eval_matches_representation_sum() {
        let (a, b, lam, n) = (-0.5, -0.5, 1.0 / 3.0, 4usize);
        let x: f64 = 0.6;
        let y = x.powf(lam) - 1.0;
        let lg = |v: f64| ln_gamma(v).unwrap();
        let nf = n as f64;
        let pre = (lg(nf + a + 1.0) - lg(nf + 1.0) - lg(nf + a + b + 1.0)).exp();
        let mut sum = 0.0;
        for k in 0..=n {
            let kf = k as f64;
            let binom = (lg(nf + 1.0) - lg(kf + 1.0) - lg(nf - kf + 1.0)).exp();
            sum += binom * (lg(nf + kf + a + b + 1.0) - lg(kf + a + 1.0)).exp() * y.powi(k as i32);
        }
        let direct = jacobi_eval(a, b, n, 2.0 * x.powf(lam) - 1.0).0;
        let v = frac_jacobi_eval(&cfg(a, b, lam, n), n, x);
        assert!((v - direct).abs() < 1e-15);
        assert!(
            (v - pre * sum).abs() < 1e-12 * sum.abs().max(1.0),
            "{v} {}",
            pre * sum
        );
    }

    #[test]
    fn lambda_derivative_simple_cases() {
        let c = cfg(0.0, 0.0, 0.37, 3);
        assert!((frac_jacobi_lambda_deriv(&c, 1, 1, 0.42) - 2.0).abs() < 1e-15);
        assert_eq!(
            frac_jacobi_lambda_deriv(&c, 3, 0, 0.42),
            frac_jacobi_eval(&c, 3, 0.42)
        );
        assert_eq!(frac_jacobi_lambda_deriv(&c, 2, 3, 0.42), 0.0);
    }

    #[test]
    fn lambda_derivative_finite_difference() {
        // D²_λ is d²/dy² with y = x^λ, so central differences in y are the oracle
        let c = cfg(-0.5, 0.3, 0.5, 6);
        let x: f64 = 0.37;
        let y0 = x.powf(c.lambda);
        let h = 1e-5;
        let f = |y: f64| jacobi_eval(c.alpha, c.beta, 6, 2.0 * y - 1.0).0;
        // second derivative needs the fourth-order stencil to beat 1e-6
        let fd = (-f(y0 + 2.0 * h) + 16.0 * f(y0 + h) - 30.0 * f(y0) + 16.0 * f(y0 - h)
            - f(y0 - 2.0 * h))
            / (12.0 * h * h);
        let d2 = frac_jacobi_lambda_deriv(&c, 6, 2, x);
        assert!((d2 - fd).abs() <= 1e-6 * d2.abs(), "{d2} vs {fd}");
        // first derivative with the plain central stencil
        let fd1 = (f(y0 + h) - f(y0 - h)) / (2.0 * h);
        let d1 = frac_jacobi_lambda_deriv(&c, 6, 1, x);
        assert!((d1 - fd1).abs() <= 1e-6 * d1.abs());
    }

    #[test]
    fn constants_examples() {
        let k = BasisConstants::new(0.0, 0.0);
        assert!((k.gamma_hat(0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(k.sigma(3), 12.0);
        // Legendre on [0,1]: ∫ P_n(2z-1)² dz = 1/(2n+1)
        for n in 0..10 {
            assert!((k.gamma_hat(n).unwrap() - 1.0 / (2 * n + 1) as f64).abs() < 1e-14);
        }
        // alpha + beta = -1 at n = 0
        let k = BasisConstants::new(-0.5, -0.5);
        assert!((k.gamma_hat(0).unwrap() - PI).abs() < 1e-14);
    }

    #[test]
    fn h_hat_matches_d_hat_squared_times_shifted_gamma_hat() {
        for &(a, b) in &[(-0.5, -0.5), (0.0, 0.0), (0.3, -0.7)] {
            let k = BasisConstants::new(a, b);
            for n in 1..10 {
                for kk in 1..=n {
                    let lhs = k.h_hat(n, kk).unwrap();
                    let shifted = BasisConstants::new(a + kk as f64, b + kk as f64);
                    let rhs = k.d_hat(n, kk).powi(2) * shifted.gamma_hat(n - kk).unwrap();
                    assert!((lhs - rhs).abs() <= 1e-12 * rhs, "n={n} k={kk}");
                }
            }
        }
    }

    #[test]
    fn h_hat_quadrature_oracle() {
        // ∫ ω^{a+2,b+2,λ} (D²_λ J_4)² dx, computed in z with weight (1-z)^{a+2} z^{b+2}
        let (a, b, lam) = (-0.5, -0.5, 0.4);
        let c = cfg(a, b, lam, 4);
        let rule = gauss_jacobi_rule(a + 2.0, b + 2.0, 20).unwrap();
        let v = rule.integrate(|z| {
            let x = pow_inv_lambda(z, lam);
            frac_jacobi_lambda_deriv(&c, 4, 2, x).powi(2)
        });
        let h = BasisConstants::new(a, b).h_hat(4, 2).unwrap();
        assert!((v - h).abs() < 1e-11 * h, "{v} vs {h}");
    }

    #[test]
    fn basis_nodes() {
        let b = FractionalBasis::new(cfg(0.2, -0.3, 1.0, 7)).unwrap();
        assert_eq!(b.x_nodes, b.z_nodes);

        let b = FractionalBasis::new(cfg(-0.5, -0.5, 0.5, 3)).unwrap();
        let mut cheb: Vec<f64> = (1..=4)
            .map(|k| 0.5 * (1.0 + ((2 * k - 1) as f64 * PI / 8.0).cos()))
            .collect();
        cheb.sort_by(f64::total_cmp);
        for ((z, x), c) in b.z_nodes.iter().zip(&b.x_nodes).zip(&cheb) {
            assert!((z - c).abs() < 1e-15);
            assert!((x - c * c).abs() < 1e-15);
        }
        assert!(b.x_nodes.windows(2).all(|w| w[0] < w[1]));
        let wmax = b.bary_weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        assert_eq!(wmax, 1.0);
    }

    #[test]
    fn cardinal_property_and_partition_of_unity() {
        let b = FractionalBasis::new(cfg(-0.5, -2.0 / 3.0, 1.0 / 3.0, 20)).unwrap();
        let n = b.len();
        for i in 0..n {
            for j in 0..n {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                let v = lagrange_eval(&b, &e, b.x_nodes[i]);
                assert_eq!(v, if i == j { 1.0 } else { 0.0 });
            }
        }
        let ones = vec![1.0; n];
        for k in 0..=100 {
            let x = k as f64 / 100.0;
            assert!((lagrange_eval(&b, &ones, x) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn linear_interpolation_n1() {
        let b = FractionalBasis::new(cfg(0.0, 0.0, 1.0, 1)).unwrap();
        let (z0, z1) = (b.z_nodes[0], b.z_nodes[1]);
        for &x in &[0.0, 0.1, 0.5, 0.77, 1.0] {
            let v = lagrange_eval(&b, &[0.0, 1.0], x);
            assert!((v - (x - z0) / (z1 - z0)).abs() < 1e-15);
        }
    }

    #[test]
    fn barycentric_weights_large_n_are_finite() {
        let b = FractionalBasis::new(cfg(-0.5, -0.5, 1.0, 160)).unwrap();
        assert!(b.bary_weights.iter().all(|w| w.is_finite() && *w != 0.0));
        // alternating signs for ordered nodes
        assert!(b.bary_weights.windows(2).all(|w| w[0] * w[1] < 0.0));
    }

    #[test]
    fn lebesgue_small_cases() {
        let b = FractionalBasis::new(cfg(0.0, 0.0, 0.5, 0)).unwrap();
        assert!((lebesgue_constant(&b, 1000) - 1.0).abs() < 1e-15);
        let l16 = lebesgue_constant(
            &FractionalBasis::new(cfg(-0.5, -0.5, 1.0, 16)).unwrap(),
            2000,
        );
        let l64 = lebesgue_constant(
            &FractionalBasis::new(cfg(-0.5, -0.5, 0.3, 64)).unwrap(),
            2000,
        );
        assert!(l64 / l16 <= 2.2, "{l16} {l64}");
    }

    #[test]
    fn lebesgue_legendre_grows_faster_than_log() {
        let l8 = lebesgue_constant(&FractionalBasis::new(cfg(0.0, 0.0, 1.0, 8)).unwrap(), 4000);
        let l32 = lebesgue_constant(&FractionalBasis::new(cfg(0.0, 0.0, 1.0, 32)).unwrap(), 4000);
        // log growth would give a ratio near ln(33)/ln(9) ≈ 1.6; √N growth gives 2
        assert!(l32 / l8 > (33f64).ln() / (9f64).ln(), "{l8} {l32}");
    }
}
