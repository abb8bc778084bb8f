#![allow(dead_code)]

use fracvie::{gamma, jacobi_eval, VieProblem};

/// Gauss–Jacobi rule for `(1-z)^a z^b` on `[0, 1]`, found by Newton iteration
/// with deflation on `P_n^{(a,b)}` rather than by an eigenvalue solve.
pub fn newton_gauss_jacobi(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut roots: Vec<f64> = Vec::with_capacity(n);
    for k in 0..n {
        let mut t = -((2 * k + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
        for _ in 0..100 {
            let (p, dp) = jacobi_eval(a, b, n, t);
            let defl: f64 = roots.iter().map(|r| 1.0 / (t - r)).sum();
            let step = p / (dp - p * defl);
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        roots.push(t);
    }
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let nf = n as f64;
    let c = gamma(nf + a + 1.0).unwrap() * gamma(nf + b + 1.0).unwrap()
        / (gamma(nf + a + b + 1.0).unwrap() * gamma(nf + 1.0).unwrap());
    let mut z = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for &t in &roots {
        let dp = jacobi_eval(a, b, n, t).1;
        // weight on [-1,1] is c 2^{a+b+1} / ((1-t²) P'²); the map to [0,1] divides by 2^{a+b+1}
        w.push(c / ((1.0 - t * t) * dp * dp));
        z.push(0.5 * (1.0 + t));
    }
    (z, w)
}

/// Product-form Lagrange cardinal `ℓ_j(x)` over `nodes`.
pub fn lagrange_product(nodes: &[f64], j: usize, x: f64) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != j)
        .map(|(_, &xk)| (x - xk) / (nodes[j] - xk))
        .product()
}

/// `∫₀ˣ (x-s)^(-mu) u(s) ds` by `t = 1 - s/x`, `t = v^(1/(1-mu))`, which turns
/// the kernel singularity into a constant, then composite Gauss–Legendre on
/// panels graded geometrically towards both ends (`v^k` is not smooth at
/// `v = 0`, and `s → 0` as `v → 1`).
pub fn singular_integral<F: Fn(f64) -> f64>(mu: f64, x: f64, u: F) -> f64 {
    let (gz, gw) = newton_gauss_jacobi(0.0, 0.0, 20);
    let k = 1.0 / (1.0 - mu);
    let mut edges = vec![0.0];
    for j in (2..=60).rev() {
        edges.push(0.5f64.powi(j));
    }
    for j in 1..=60 {
        edges.push(1.0 - 0.5f64.powi(j));
    }
    edges.push(1.0);
    let mut sum = 0.0;
    for p in edges.windows(2) {
        let (lo, h) = (p[0], p[1] - p[0]);
        for (z, w) in gz.iter().zip(&gw) {
            let v = lo + h * z;
            sum += h * w * u(x * (1.0 - v.powf(k)));
        }
    }
    k * x.powf(1.0 - mu) * sum
}

pub fn constant_solution_problem(mu: f64) -> VieProblem {
    VieProblem::from_fns(mu, |_, _| 1.0, move |x| 1.0 - x.powf(1.0 - mu) / (1.0 - mu))
        .unwrap()
        .with_exact(fracvie::ExactSolution::from_fn(|_| 1.0, None))
}

pub fn sup_error<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(a: F, b: G, grid: usize) -> f64 {
    (0..=grid)
        .map(|k| {
            let x = k as f64 / grid as f64;
            (a(x) - b(x)).abs()
        })
        .fold(0.0, f64::max)
}

/// Independent classical (lambda = 1) collocation matrix `M` for `K`,
/// built with Newton-found nodes/weights and product-form Lagrange cardinals.
pub fn classical_integral_matrix<K: Fn(f64, f64) -> f64>(
    mu: f64,
    alpha: f64,
    beta: f64,
    n: usize,
    kernel: K,
) -> Vec<Vec<f64>> {
    let (x, _) = newton_gauss_jacobi(alpha, beta, n + 1);
    let (theta, w) = newton_gauss_jacobi(-mu, 0.0, n + 1);
    (0..=n)
        .map(|i| {
            (0..=n)
                .map(|j| {
                    theta
                        .iter()
                        .zip(&w)
                        .map(|(&t, &wq)| {
                            let s = x[i] * t;
                            x[i].powf(1.0 - mu) * kernel(x[i], s) * lagrange_product(&x, j, s) * wq
                        })
                        .sum()
                })
                .collect()
        })
        .collect()
}
