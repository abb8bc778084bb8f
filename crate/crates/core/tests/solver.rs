mod common;

use common::*;
use fracvie::experiments::find_entry;
use fracvie::vie_solver::{integral_matrix, Discretization};
use fracvie::{gauss_jacobi_rule, residual, solve, BasisConfig, ExactSolution, VieProblem};

#[test]
fn newton_rule_agrees_with_eigenvalue_rule() {
    for &(a, b) in &[(-0.5, -0.5), (-0.3, 0.0), (0.0, 1.0)] {
        for n in [1, 5, 17] {
            let (z, w) = newton_gauss_jacobi(a, b, n);
            let rule = gauss_jacobi_rule(a, b, n).unwrap();
            for k in 0..n {
                assert!((z[k] - rule.nodes[k]).abs() < 1e-14);
                assert!((w[k] - rule.weights[k]).abs() < 1e-13 * w[k].max(1.0));
            }
        }
    }
}

#[test]
fn singular_integral_oracle_matches_beta_identity() {
    // ∫₀ˣ (x-s)^(-mu) s^g ds = B(1-mu, g+1) x^(g+1-mu)
    for &(mu, g) in &[(0.1, 1.0 / 3.0), (0.5, 0.5), (0.9, 2.3)] {
        let x: f64 = 0.77;
        let want = fracvie::beta_fn(1.0 - mu, g + 1.0).unwrap() * x.powf(g + 1.0 - mu);
        let got = singular_integral(mu, x, |s| s.powf(g));
        assert!((got - want).abs() < 1e-12, "{mu} {g}: {got} {want}");
    }
}

#[test]
fn catalog_sources_satisfy_the_equation() {
    // u(x) - g(x) - ∫(x-s)^(-mu) u(s) ds = 0 for every exact catalog entry
    for id in ["ex3", "ex4i", "ex4ii", "ex4iii"] {
        for &mu in &[0.1, 0.5, 2.0 / 3.0] {
            let p = find_entry(id).unwrap().problem(mu).unwrap();
            let u = p.exact.clone().unwrap();
            for &x in &[0.05, 0.3, 0.71, 1.0] {
                let ku = singular_integral(mu, x, |s| u.eval(s).unwrap());
                let r = u.eval(x).unwrap() - p.source_at(x).unwrap() - ku;
                assert!(r.abs() < 1e-11, "{id} mu={mu} x={x}: {r}");
            }
        }
    }
}

#[test]
fn lambda_one_matches_classical_assembly() {
    let mu = 0.35;
    let kernel = |x: f64, s: f64| (x - s).exp() * (1.0 + x * s);
    let p = VieProblem::from_fns(mu, kernel, |_| 1.0).unwrap();
    for n in [0, 1, 4, 9, 16] {
        for &(a, b) in &[(-0.5, -0.5), (0.0, 0.0), (-0.5, -2.0 / 3.0)] {
            let cfg = BasisConfig::new(a, b, 1.0, n).unwrap();
            let m = integral_matrix(&p, &Discretization::new(mu, cfg).unwrap()).unwrap();
            let oracle = classical_integral_matrix(mu, a, b, n, kernel);
            for i in 0..=n {
                for j in 0..=n {
                    let d = (m[(i, j)] - oracle[i][j]).abs();
                    assert!(d <= 1e-13, "n={n} ({a},{b}) [{i}][{j}]: {d:e}");
                }
            }
        }
    }
}

#[test]
fn fractional_solve_equals_z_variable_solve() {
    // with v(z) = u(z²) the equation becomes
    // v(z) = g(z²) + ∫₀ᶻ (z-t)^(-mu) (z+t)^(-mu) 2t v(t) dt
    let mu = 0.4;
    let g = |x: f64| (3.0 * x).cos() + x;
    let p = VieProblem::from_fns(mu, |_, _| 1.0, g).unwrap();
    let pz = VieProblem::from_fns(
        mu,
        move |z, t| {
            if t == 0.0 {
                0.0
            } else {
                2.0 * t * (z + t).powf(-mu)
            }
        },
        move |z| g(z * z),
    )
    .unwrap();
    let n = 24;
    let sol = solve(&p, -0.5, -0.5, 0.5, n).unwrap();
    let solz = solve(&pz, -0.5, -0.5, 1.0, n).unwrap();
    let d = sup_error(|x| sol.evaluate(x), |x| solz.evaluate(x.sqrt()), 500);
    assert!(d <= 2e-12, "{d:e}");
}

#[test]
fn zero_kernel_returns_source_exactly() {
    let p = VieProblem::from_fns(0.7, |_, _| 0.0, |x| x.sqrt() + 1.0).unwrap();
    let sol = solve(&p, 0.0, 0.0, 1.0 / 3.0, 11).unwrap();
    for (u, x) in sol.nodal_values.iter().zip(&sol.basis.x_nodes) {
        assert_eq!(*u, x.sqrt() + 1.0);
    }
}

#[test]
fn constant_solution_to_ten_digits() {
    let p = constant_solution_problem(0.5);
    let sol = solve(&p, -0.5, -0.5, 0.5, 16).unwrap();
    assert!(sup_error(|x| sol.evaluate(x), |_| 1.0, 1000) <= 1e-10);
}

#[test]
fn ex4i_fine_lambda_is_spectral() {
    let p = find_entry("ex4i").unwrap().problem(0.1).unwrap();
    let u = p.exact.clone().unwrap();
    let sol = solve(&p, -0.5, -0.5, 1.0 / 6.0, 24).unwrap();
    let e = sup_error(|x| sol.evaluate(x), |x| u.eval(x).unwrap(), 2000);
    assert!(e < 1e-9, "{e:e}");
}

#[test]
fn ex1_conditioning_and_residual() {
    let p = find_entry("ex1").unwrap().problem(0.5).unwrap();
    let s8 = solve(&p, -0.5, -0.5, 0.5, 8).unwrap();
    assert!(s8.diagnostics.condition_estimate < 1e3);
    let s24 = solve(&p, -0.5, -0.5, 0.5, 24).unwrap();
    let r = residual(&s24, &p, 100, 100).unwrap();
    assert!(r <= 1e-8, "{r:e}");
}

#[test]
fn ex3_decays_spectrally() {
    let p = find_entry("ex3").unwrap().problem(0.5).unwrap();
    let u = p.exact.clone().unwrap();
    let errs: Vec<f64> = [4, 8, 12]
        .iter()
        .map(|&n| {
            let s = solve(&p, -0.5, -0.5, 0.5, n).unwrap();
            sup_error(|x| s.evaluate(x), |x| u.eval(x).unwrap(), 1000)
        })
        .collect();
    assert!(
        errs[1] < 1e-3 * errs[0] && errs[2] < 1e-3 * errs[1],
        "{errs:?}"
    );
}

#[test]
fn residual_bounded_by_error() {
    let p = find_entry("ex4ii").unwrap().problem(0.3).unwrap();
    let u = p.exact.clone().unwrap();
    for n in [8, 16, 32] {
        let s = solve(&p, -0.5, -0.5, 1.0, n).unwrap();
        let e = sup_error(|x| s.evaluate(x), |x| u.eval(x).unwrap(), 2000);
        let r = residual(&s, &p, 100, 4 * (n + 1)).unwrap();
        assert!(r <= 100.0 * e, "N={n}: {r:e} vs {e:e}");
    }
}

#[test]
fn exact_solution_at_zero_uses_supplied_limit() {
    let e = ExactSolution::from_fn(|x: f64| x.powf(-0.5) * x.sin(), Some(0.0));
    assert_eq!(e.eval(0.0).unwrap(), 0.0);
    assert!((e.eval(1e-8).unwrap() - 1e-4).abs() < 1e-10);
}
