//! Scalar special functions and Gauss–Jacobi quadrature.
//!
//! Everything here works in `f64`. Quadrature rules live on `[0, 1]` with the
//! weight `(1 - z)^alpha * z^beta`; they are built from the classical Jacobi
//! recurrence on `[-1, 1]` by the Golub–Welsch eigenvalue method and then
//! mapped affinely, so that `(1 - t)^alpha (1 + t)^beta` becomes
//! `(1 - z)^alpha z^beta` (alpha stays attached to the right endpoint).

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    #[error("{func}: argument {value} outside the domain")]
    Domain { func: &'static str, value: f64 },
    #[error(
        "tridiagonal eigensolver did not converge for eigenvalue {index} after {sweeps} sweeps"
    )]
    NoConvergence { index: usize, sweeps: usize },
}

/// Lanczos coefficients for g = 7, nine terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Maximum implicit-shift sweeps spent on a single eigenvalue.
pub const MAX_QL_SWEEPS: usize = 60;
const QL_TOL: f64 = 1e-15;

fn lanczos_ln_gamma(x: f64) -> f64 {
    // valid for x >= 0.5
    let x = x - 1.0;
    let mut a = LANCZOS_COEFFS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    LN_SQRT_2PI + (x + 0.5) * t.ln() - t + a.ln()
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64, SpecialError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecialError::Domain {
            func: "ln_gamma",
            value: x,
        });
    }
    if x < 0.5 {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx), sin(πx) > 0 on (0, 1/2)
        Ok((PI / (PI * x).sin()).ln() - lanczos_ln_gamma(1.0 - x))
    } else {
        Ok(lanczos_ln_gamma(x))
    }
}

/// `Γ(x)` for any real `x` that is not a pole.
pub fn gamma(x: f64) -> Result<f64, SpecialError> {
    if !x.is_finite() || (x <= 0.0 && x == x.floor()) {
        return Err(SpecialError::Domain {
            func: "gamma",
            value: x,
        });
    }
    if x >= 0.5 {
        Ok(lanczos_ln_gamma(x).exp())
    } else {
        let s = (PI * x).sin();
        Ok(PI / (s * lanczos_ln_gamma(1.0 - x).exp()))
    }
}

/// Euler Beta function `B(a, b) = Γ(a)Γ(b)/Γ(a+b)`.
pub fn beta_fn(a: f64, b: f64) -> Result<f64, SpecialError> {
    if !(a > 0.0) {
        return Err(SpecialError::Domain {
            func: "beta",
            value: a,
        });
    }
    if !(b > 0.0) {
        return Err(SpecialError::Domain {
            func: "beta",
            value: b,
        });
    }
    Ok((ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?).exp())
}

fn check_jacobi_params(alpha: f64, beta: f64) -> Result<(), SpecialError> {
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(SpecialError::Domain {
            func: "jacobi alpha",
            value: alpha,
        });
    }
    if !(beta > -1.0) || !beta.is_finite() {
        return Err(SpecialError::Domain {
            func: "jacobi beta",
            value: beta,
        });
    }
    Ok(())
}

/// Monic three-term recurrence coefficients `(a_k, b_k)` for the Jacobi weight
/// `(1-t)^alpha (1+t)^beta` on `[-1, 1]`:
/// `p_{k+1}(t) = (t - a_k) p_k(t) - b_k p_{k-1}(t)`.
///
/// `b_0` is returned as the total mass of the weight, which is the usual
/// convention and what Golub–Welsch needs.
pub fn jacobi_recurrence(alpha: f64, beta: f64, k: usize) -> Result<(f64, f64), SpecialError> {
    check_jacobi_params(alpha, beta)?;
    let ab = alpha + beta;
    let kf = k as f64;
    let a = if k == 0 {
        (beta - alpha) / (ab + 2.0)
    } else {
        let s = 2.0 * kf + ab;
        (beta * beta - alpha * alpha) / (s * (s + 2.0))
    };
    let b = match k {
        0 => 2f64.powf(ab + 1.0) * beta_fn(alpha + 1.0, beta + 1.0)?,
        // the general expression is 0/0 at k = 1 when alpha + beta = -1
        1 => 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab)),
        _ => {
            let s = 2.0 * kf + ab;
            4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
        }
    };
    Ok((a, b))
}

/// Classical Jacobi polynomial `P_n^{(alpha,beta)}(t)` and its derivative,
/// normalized so that `P_n(1) = Γ(n+alpha+1) / (n! Γ(alpha+1))`.
pub fn jacobi_eval(alpha: f64, beta: f64, n: usize, t: f64) -> (f64, f64) {
    let value = jacobi_value(alpha, beta, n, t);
    let derivative = if n == 0 {
        0.0
    } else {
        0.5 * (n as f64 + alpha + beta + 1.0) * jacobi_value(alpha + 1.0, beta + 1.0, n - 1, t)
    };
    (value, derivative)
}

fn jacobi_value(alpha: f64, beta: f64, n: usize, t: f64) -> f64 {
    let mut p0 = 1.0;
    if n == 0 {
        return p0;
    }
    let ab = alpha + beta;
    let mut p1 = (alpha + 1.0) + 0.5 * (ab + 2.0) * (t - 1.0);
    for k in 2..=n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        let c0 = 2.0 * kf * (kf + ab) * (s - 2.0);
        let c1 = (s - 1.0) * (s * (s - 2.0) * t + alpha * alpha - beta * beta);
        let c2 = 2.0 * (kf + alpha - 1.0) * (kf + beta - 1.0) * s;
        let p2 = (c1 * p1 - c2 * p0) / c0;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Gauss–Jacobi rule on `[0, 1]` for the weight `(1 - z)^alpha z^beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub alpha: f64,
    pub beta: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫₀¹ f(z) (1-z)^alpha z^beta dz` approximated by the rule.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * f(z))
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Builds the `npoints`-point Gauss–Jacobi rule on `[0, 1]`.
pub fn gauss_jacobi_rule(
    alpha: f64,
    beta: f64,
    npoints: usize,
) -> Result<QuadratureRule, SpecialError> {
    check_jacobi_params(alpha, beta)?;
    if npoints == 0 {
        return Err(SpecialError::Domain {
            func: "gauss_jacobi_rule npoints",
            value: 0.0,
        });
    }
    let mut diag = Vec::with_capacity(npoints);
    let mut off = vec![0.0; npoints];
    for k in 0..npoints {
        let (a, b) = jacobi_recurrence(alpha, beta, k)?;
        diag.push(a);
        if k > 0 {
            off[k - 1] = b.sqrt();
        }
    }
    let first_row = tridiagonal_ql(&mut diag, &mut off)?;

    let mass = beta_fn(beta + 1.0, alpha + 1.0)?;
    let mut pairs: Vec<(f64, f64)> = diag
        .iter()
        .zip(&first_row)
        .map(|(&t, &v)| ((1.0 + t) * 0.5, mass * v * v))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (nodes, weights) = pairs.into_iter().unzip();
    Ok(QuadratureRule {
        alpha,
        beta,
        nodes,
        weights,
    })
}

/// Implicit-shift QL on a symmetric tridiagonal matrix.
///
/// `diag` is overwritten by the eigenvalues, `off[i]` holds the coupling
/// between rows `i` and `i + 1` (the last slot is scratch). Only the first
/// component of each normalized eigenvector is accumulated and returned.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64]) -> Result<Vec<f64>, SpecialError> {
    let n = diag.len();
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    if n == 1 {
        return Ok(z);
    }
    off[n - 1] = 0.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= QL_TOL * dd || off[m].abs() < f64::MIN_POSITIVE {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_SWEEPS {
                return Err(SpecialError::NoConvergence {
                    index: l,
                    sweeps: MAX_QL_SWEEPS,
                });
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                let zi1 = z[i + 1];
                z[i + 1] = s * z[i] + c * zi1;
                z[i] = c * z[i] - s * zi1;
            }
            if underflow {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(z)
}

/// The series `(x/2)^mu Σ_k (-x²)^k / (k! Γ(mu+k+1) 4^k)`, i.e. the Bessel
/// function of the first kind of order `mu`.
///
/// Summation stops once a term drops below `1e-17` times the running sum, or
/// after 200 terms.
pub fn bessel_series(mu: f64, x: f64) -> Result<f64, SpecialError> {
    if !(mu > -1.0) {
        return Err(SpecialError::Domain {
            func: "bessel_series order",
            value: mu,
        });
    }
    if !(x >= 0.0) {
        return Err(SpecialError::Domain {
            func: "bessel_series",
            value: x,
        });
    }
    let q = -0.25 * x * x;
    let mut term = 1.0 / gamma(mu + 1.0)?;
    let mut sum = term;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * (mu + kf));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() || term == 0.0 {
            break;
        }
    }
    Ok((0.5 * x).powf(mu) * sum)
}
