//! Problem catalog, convergence sweeps, rate fitting and CSV reports.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use thiserror::Error;

use crate::approximation_ops::{error_norms, ApproxError, WeightedNormSpec};
use crate::fractional_basis::{build_fractional_basis, lagrange_eval, BasisConfig};
use crate::special_functions::{
    bessel_series, beta_fn, gamma, gauss_jacobi_rule, jacobi_eval, SpecialError,
};
use crate::vie_solver::{
    residual, solve_with, ExactSolution, FnError, ScalarFn, Solution, SolverError, VieProblem,
};

/// Records with an error below this are treated as plateau and left out of fits.
pub const PLATEAU_FLOOR: f64 = 1e-13;

/// Equispaced points used for the L∞ error (collocation nodes are added).
pub const DEFAULT_ERROR_GRID: usize = 2001;

/// Lower bound on the quadrature order used for the weighted L² error.
pub const MIN_NORM_ORDER: usize = 160;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("unknown catalog entry `{0}`")]
    UnknownProblem(String),
    #[error("n list is empty")]
    EmptyNList,
    #[error("exact reference requested but the problem has no exact solution")]
    NoExactSolution,
    #[error("reference solve at N = {n} failed: {source}")]
    Reference {
        n: usize,
        #[source]
        source: SolverError,
    },
    #[error("need at least 3 usable points in the fit window, got {0}")]
    InsufficientData(usize),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: bad value `{value}` in column {column}")]
    BadField {
        path: PathBuf,
        column: &'static str,
        value: String,
    },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Approx(#[from] ApproxError),
}

impl From<SpecialError> for ExperimentError {
    fn from(e: SpecialError) -> Self {
        ExperimentError::Solver(SolverError::Special(e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferencePolicy {
    Exact,
    /// Reference solve at (at least) this N with the sweep's own parameters.
    HighN(usize),
}

impl fmt::Display for ReferencePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReferencePolicy::Exact => f.write_str("exact"),
            ReferencePolicy::HighN(n) => write!(f, "N={n}"),
        }
    }
}

pub struct CatalogEntry {
    pub id: &'static str,
    pub reference_policy: ReferencePolicy,
    pub notes: &'static str,
    build: fn(f64) -> Result<VieProblem, SolverError>,
}

impl CatalogEntry {
    pub fn problem(&self, mu: f64) -> Result<VieProblem, SolverError> {
        (self.build)(mu)
    }
}

impl fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CatalogEntry")
            .field("id", &self.id)
            .field("reference_policy", &self.reference_policy)
            .finish_non_exhaustive()
    }
}

fn unit_kernel(
    mu: f64,
    source: impl Fn(f64) -> f64 + Send + Sync + 'static,
) -> Result<VieProblem, SolverError> {
    VieProblem::from_fns(mu, |_, _| 1.0, source)
}

/// `u = Σ c_k x^{γ_k}` with `K ≡ 1`, and `g = u - Σ c_k B(1-mu, γ_k+1) x^{γ_k+1-mu}`.
fn power_sum_problem(mu: f64, terms: &'static [(f64, f64)]) -> Result<VieProblem, SolverError> {
    let mut integrated = Vec::with_capacity(terms.len());
    for &(c, g) in terms {
        integrated.push((c * beta_fn(1.0 - mu, g + 1.0)?, g + 1.0 - mu));
    }
    let u = move |x: f64| terms.iter().map(|&(c, g)| c * x.powf(g)).sum::<f64>();
    let problem = unit_kernel(mu, move |x| {
        u(x) - integrated.iter().map(|&(c, p)| c * x.powf(p)).sum::<f64>()
    })?;
    Ok(problem.with_exact(ExactSolution::from_fn(u, Some(0.0))))
}

fn ex1(mu: f64) -> Result<VieProblem, SolverError> {
    VieProblem::from_fns(mu, |x, s| (x - s).exp(), |_| 1.0)
}

fn ex2(mu: f64) -> Result<VieProblem, SolverError> {
    unit_kernel(mu, f64::sqrt)
}

fn ex3(mu: f64) -> Result<VieProblem, SolverError> {
    let scale = std::f64::consts::PI.sqrt() * gamma(1.0 - mu)?;
    let nu = 0.5 - mu;
    let u = move |x: f64| if x == 0.0 { 0.0 } else { x.powf(-mu) * x.sin() };
    let source: ScalarFn = Arc::new(move |x: f64| {
        if x == 0.0 {
            return Ok(0.0);
        }
        let j = bessel_series(nu, 0.5 * x).map_err(|e| FnError::new(e.to_string()))?;
        Ok(u(x) - scale * x.powf(nu) * (0.5 * x).sin() * j)
    });
    Ok(VieProblem::new(mu, Arc::new(|_, _| Ok(1.0)), source)?
        .with_exact(ExactSolution::from_fn(u, Some(0.0))))
}

fn ex4i(mu: f64) -> Result<VieProblem, SolverError> {
    power_sum_problem(mu, &[(1.0, 1.0 / 3.0), (1.0, 0.5)])
}

fn ex4ii(mu: f64) -> Result<VieProblem, SolverError> {
    power_sum_problem(mu, &[(1.0, 1.1), (1.0, 2.3)])
}

/// Highest power of `y` kept in the sine series for ex4iii; `2^m/m!` is far
/// below machine precision for `y ≤ 2` at this order.
const SINE_SERIES_ORDER: usize = 41;

fn ex4iii(mu: f64) -> Result<VieProblem, SolverError> {
    let (a, b) = (2f64.sqrt(), 3f64.sqrt());
    // ∫₀ˣ (x-s)^(-mu) sin(s^a + s^b) ds, expanded term by term
    let mut integrated = Vec::new();
    let mut factorial = 1.0;
    for m in 1..=SINE_SERIES_ORDER {
        factorial *= m as f64;
        if m % 2 == 0 {
            continue;
        }
        let sign = if (m / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let mut binom = 1.0;
        for j in 0..=m {
            if j > 0 {
                binom *= (m - j + 1) as f64 / j as f64;
            }
            let p = a * j as f64 + b * (m - j) as f64;
            let c = sign * binom / factorial * beta_fn(1.0 - mu, p + 1.0)?;
            integrated.push((c, p + 1.0 - mu));
        }
    }
    let u = move |x: f64| (x.powf(a) + x.powf(b)).sin();
    let problem = unit_kernel(mu, move |x| {
        u(x) - integrated.iter().map(|&(c, p)| c * x.powf(p)).sum::<f64>()
    })?;
    Ok(problem.with_exact(ExactSolution::from_fn(u, Some(0.0))))
}

pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            id: "ex1",
            reference_policy: ReferencePolicy::HighN(64),
            notes: "g = 1, K = exp(x - s); solution not known in closed form",
            build: ex1,
        },
        CatalogEntry {
            id: "ex2",
            reference_policy: ReferencePolicy::HighN(80),
            notes: "g = x^0.5, K = 1; limited regularity source",
            build: ex2,
        },
        CatalogEntry {
            id: "ex3",
            reference_policy: ReferencePolicy::Exact,
            notes: "K = 1, u = x^-mu sin x (u(0) = 0); source built from a Bessel function",
            build: ex3,
        },
        CatalogEntry {
            id: "ex4i",
            reference_policy: ReferencePolicy::Exact,
            notes: "K = 1, u = x^(1/3) + x^(1/2)",
            build: ex4i,
        },
        CatalogEntry {
            id: "ex4ii",
            reference_policy: ReferencePolicy::Exact,
            notes: "K = 1, u = x^1.1 + x^2.3",
            build: ex4ii,
        },
        CatalogEntry {
            id: "ex4iii",
            reference_policy: ReferencePolicy::Exact,
            notes: "K = 1, u = sin(x^sqrt2 + x^sqrt3); source integrated term by term from the sine series",
            build: ex4iii,
        },
    ]
}

pub fn find_entry(id: &str) -> Result<CatalogEntry, ExperimentError> {
    catalog()
        .into_iter()
        .find(|e| e.id == id)
        .ok_or_else(|| ExperimentError::UnknownProblem(id.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRecord {
    pub n: usize,
    pub linf: f64,
    pub l2w: f64,
    pub assemble_ms: f64,
    pub solve_ms: f64,
    pub cond: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitKind {
    LogLog,
    SemiLog,
}

impl fmt::Display for FitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitKind::LogLog => "loglog",
            FitKind::SemiLog => "semilog",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope_loglog: f64,
    pub slope_semilog: f64,
    pub r2_loglog: f64,
    pub r2_semilog: f64,
    pub preferred: FitKind,
    pub points: usize,
}

impl RateFit {
    pub fn is_exponential(&self) -> bool {
        self.preferred == FitKind::SemiLog
    }
}

/// Fits to both error columns over one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportFit {
    pub window: (usize, usize),
    pub linf: RateFit,
    pub l2w: RateFit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub n: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub problem_id: String,
    pub mu: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub reference: ReferencePolicy,
    /// Max of `|u_ref|` over the error grid; scales the plateau floor.
    pub reference_scale: f64,
    /// Sorted by N. Stops before the first failed solve.
    pub records: Vec<ConvergenceRecord>,
    pub failure: Option<SweepFailure>,
}

impl ConvergenceReport {
    /// Errors below `PLATEAU_FLOOR · max(1, reference_scale)` are roundoff.
    pub fn plateau_floor(&self) -> f64 {
        PLATEAU_FLOOR * self.reference_scale.max(1.0)
    }

    pub fn fit(&self, window: (usize, usize)) -> Result<ReportFit, ExperimentError> {
        let col = |f: fn(&ConvergenceRecord) -> f64| -> Vec<(usize, f64)> {
            self.records.iter().map(|r| (r.n, f(r))).collect()
        };
        Ok(ReportFit {
            window,
            linf: fit_rates_with_floor(&col(|r| r.linf), window, self.plateau_floor())?,
            l2w: fit_rates_with_floor(&col(|r| r.l2w), window, self.plateau_floor())?,
        })
    }

    /// Fit over the full range of recorded N.
    pub fn fit_all(&self) -> Result<ReportFit, ExperimentError> {
        let lo = self.records.first().map_or(0, |r| r.n);
        let hi = self.records.last().map_or(0, |r| r.n);
        self.fit((lo, hi))
    }
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).min(1.0)
    };
    (slope, r2)
}

/// Least-squares slopes of `ln e` against `ln N` and against `N` for the
/// points with `lo ≤ N ≤ hi` and `e ≥ PLATEAU_FLOOR`.
pub fn fit_rates(
    points: &[(usize, f64)],
    window: (usize, usize),
) -> Result<RateFit, ExperimentError> {
    fit_rates_with_floor(points, window, PLATEAU_FLOOR)
}

/// As [`fit_rates`] with an explicit plateau floor.
pub fn fit_rates_with_floor(
    points: &[(usize, f64)],
    window: (usize, usize),
    floor: f64,
) -> Result<RateFit, ExperimentError> {
    let used: Vec<(f64, f64)> = points
        .iter()
        .filter(|(n, e)| *n >= window.0 && *n <= window.1 && *e >= floor && e.is_finite())
        .map(|&(n, e)| (n as f64, e.ln()))
        .collect();
    let distinct = {
        let mut ns: Vec<u64> = used.iter().map(|p| p.0 as u64).collect();
        ns.dedup();
        ns.len()
    };
    if used.len() < 3 || distinct < 3 || used.iter().any(|p| p.0 <= 0.0) {
        return Err(ExperimentError::InsufficientData(used.len()));
    }
    let ns: Vec<f64> = used.iter().map(|p| p.0).collect();
    let log_ns: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let log_es: Vec<f64> = used.iter().map(|p| p.1).collect();
    let (slope_loglog, r2_loglog) = linear_fit(&log_ns, &log_es);
    let (slope_semilog, r2_semilog) = linear_fit(&ns, &log_es);
    let preferred = if r2_semilog >= r2_loglog {
        FitKind::SemiLog
    } else {
        FitKind::LogLog
    };
    Ok(RateFit {
        slope_loglog,
        slope_semilog,
        r2_loglog,
        r2_semilog,
        preferred,
        points: used.len(),
    })
}

/// Parameters shared by every solve of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepParams {
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
}

enum Reference {
    Exact(ExactSolution),
    Numeric(Solution),
}

fn measure(
    problem: &VieProblem,
    params: SweepParams,
    n: usize,
    reference: &Reference,
) -> Result<ConvergenceRecord, String> {
    let cfg =
        BasisConfig::new(params.alpha, params.beta, params.lambda, n).map_err(|e| e.to_string())?;
    let sol = solve_with(problem, cfg).map_err(|e| e.to_string())?;
    let norm = WeightedNormSpec::new(
        params.alpha,
        params.beta,
        params.lambda,
        (2 * n + 32).max(MIN_NORM_ORDER),
    );
    let first_err: Mutex<Option<String>> = Mutex::new(None);
    let u_ref = |x: f64| match reference {
        Reference::Numeric(r) => r.evaluate(x),
        Reference::Exact(e) => e.eval(x).unwrap_or_else(|err| {
            first_err
                .lock()
                .unwrap()
                .get_or_insert(format!("exact solution at x = {x}: {err}"));
            f64::NAN
        }),
    };
    let norms = error_norms(
        |x| sol.evaluate(x),
        u_ref,
        &norm,
        DEFAULT_ERROR_GRID,
        &sol.basis.x_nodes,
    )
    .map_err(|e| e.to_string())?;
    if let Some(msg) = first_err.into_inner().unwrap() {
        return Err(msg);
    }
    if !(norms.linf.is_finite() && norms.l2w.is_finite()) {
        return Err(format!("non-finite error norms at N = {n}"));
    }
    Ok(ConvergenceRecord {
        n,
        linf: norms.linf,
        l2w: norms.l2w,
        assemble_ms: sol.diagnostics.assemble_ms,
        solve_ms: sol.diagnostics.solve_ms,
        cond: sol.diagnostics.condition_estimate,
    })
}

/// Reference N actually used for a `HighN(n_policy)` sweep up to `n_max`.
pub fn reference_n(n_policy: usize, n_max: usize) -> usize {
    n_policy.max(2 * n_max)
}

/// Runs one solve per N (in parallel) and measures errors against the
/// reference chosen by `policy`.
pub fn sweep_problem(
    id: &str,
    problem: &VieProblem,
    policy: ReferencePolicy,
    params: SweepParams,
    n_list: &[usize],
) -> Result<ConvergenceReport, ExperimentError> {
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let n_max = *ns.last().ok_or(ExperimentError::EmptyNList)?;
    let (reference, used_policy) = match policy {
        ReferencePolicy::Exact => (
            Reference::Exact(
                problem
                    .exact
                    .clone()
                    .ok_or(ExperimentError::NoExactSolution)?,
            ),
            ReferencePolicy::Exact,
        ),
        ReferencePolicy::HighN(n_policy) => {
            let n_ref = reference_n(n_policy, n_max);
            let cfg = BasisConfig::new(params.alpha, params.beta, params.lambda, n_ref)
                .map_err(SolverError::from)?;
            let sol = solve_with(problem, cfg)
                .map_err(|source| ExperimentError::Reference { n: n_ref, source })?;
            (Reference::Numeric(sol), ReferencePolicy::HighN(n_ref))
        }
    };
    let reference_scale = (0..DEFAULT_ERROR_GRID)
        .map(|k| k as f64 / (DEFAULT_ERROR_GRID - 1) as f64)
        .map(|x| match &reference {
            Reference::Numeric(r) => r.evaluate(x).abs(),
            Reference::Exact(e) => e.eval(x).map_or(0.0, f64::abs),
        })
        .fold(0.0, f64::max);
    let results: Vec<Result<ConvergenceRecord, String>> = ns
        .par_iter()
        .map(|&n| measure(problem, params, n, &reference))
        .collect();
    let mut records = Vec::with_capacity(ns.len());
    let mut failure = None;
    for (n, r) in ns.iter().zip(results) {
        match r {
            Ok(rec) => records.push(rec),
            Err(message) => {
                failure = Some(SweepFailure { n: *n, message });
                break;
            }
        }
    }
    Ok(ConvergenceReport {
        problem_id: id.to_string(),
        mu: problem.mu,
        lambda: params.lambda,
        alpha: params.alpha,
        beta: params.beta,
        reference: used_policy,
        reference_scale,
        records,
        failure,
    })
}

pub fn sweep(
    entry: &CatalogEntry,
    mu: f64,
    lambda: f64,
    alpha: f64,
    beta: f64,
    n_list: &[usize],
) -> Result<ConvergenceReport, ExperimentError> {
    let problem = entry.problem(mu)?;
    sweep_problem(
        entry.id,
        &problem,
        entry.reference_policy,
        SweepParams {
            lambda,
            alpha,
            beta,
        },
        n_list,
    )
}

fn float(v: f64) -> String {
    format!("{v:?}")
}

fn short_float(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// `<id>_mu<mu>_lam<lambda>_N<lo>-<hi>.csv` (or `_N<n>` for a single N).
pub fn auto_file_name(report: &ConvergenceReport) -> String {
    let n = match (report.records.first(), report.records.last()) {
        (Some(a), Some(b)) if a.n != b.n => format!("{}-{}", a.n, b.n),
        (Some(a), _) => a.n.to_string(),
        _ => "none".to_string(),
    };
    format!(
        "{}_mu{}_lam{}_N{}.csv",
        report.problem_id,
        short_float(report.mu),
        short_float(report.lambda),
        n
    )
}

pub const CSV_HEADER: [&str; 6] = ["N", "linf", "l2w", "assemble_ms", "solve_ms", "cond"];

pub fn write_csv(report: &ConvergenceReport, path: &Path) -> Result<(), ExperimentError> {
    let csv_err = |source| ExperimentError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in &report.records {
        w.write_record([
            r.n.to_string(),
            float(r.linf),
            float(r.l2w),
            float(r.assemble_ms),
            float(r.solve_ms),
            float(r.cond),
        ])
        .map_err(csv_err)?;
    }
    let mut out = w.into_inner().map_err(|e| ExperimentError::Io {
        path: path.to_path_buf(),
        source: e.into_error(),
    })?;
    let mut trailer = vec![
        format!("# problem={}", report.problem_id),
        format!("# mu={}", float(report.mu)),
        format!("# lambda={}", float(report.lambda)),
        format!("# alpha={}", float(report.alpha)),
        format!("# beta={}", float(report.beta)),
        format!("# reference={}", report.reference),
        format!("# reference_scale={}", float(report.reference_scale)),
    ];
    if let Some(f) = &report.failure {
        trailer.push(format!("# failed_at_N={}: {}", f.n, f.message));
    }
    if let Ok(fit) = report.fit_all() {
        for (name, r) in [("linf", fit.linf), ("l2w", fit.l2w)] {
            trailer.push(format!(
                "# fit_{name}=loglog {:.4} (R2 {:.4}) semilog {:.4} (R2 {:.4}) preferred {}",
                r.slope_loglog, r.r2_loglog, r.slope_semilog, r.r2_semilog, r.preferred
            ));
        }
    }
    for line in trailer {
        out.extend_from_slice(line.as_bytes());
        out.push(b'\n');
    }
    fs::write(path, out).map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads back the records written by [`write_csv`]; comment lines are skipped.
pub fn read_csv(path: &Path) -> Result<Vec<ConvergenceRecord>, ExperimentError> {
    let csv_err = |source| ExperimentError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(csv_err)?;
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_err)?;
        let field = |k: usize| -> Result<f64, ExperimentError> {
            let v = row.get(k).unwrap_or("");
            v.parse().map_err(|_| ExperimentError::BadField {
                path: path.to_path_buf(),
                column: CSV_HEADER[k],
                value: v.to_string(),
            })
        };
        let n_text = row.get(0).unwrap_or("");
        let n = n_text.parse().map_err(|_| ExperimentError::BadField {
            path: path.to_path_buf(),
            column: "N",
            value: n_text.to_string(),
        })?;
        out.push(ConvergenceRecord {
            n,
            linf: field(1)?,
            l2w: field(2)?,
            assemble_ms: field(3)?,
            solve_ms: field(4)?,
            cond: field(5)?,
        });
    }
    Ok(out)
}

/// Outcome of one built-in check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, worst: Result<f64, String>, tol: f64) -> CheckResult {
    match worst {
        Ok(w) => CheckResult {
            name,
            passed: w <= tol,
            detail: format!("max error {w:.3e} (tol {tol:.0e})"),
        },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: e,
        },
    }
}

fn check_quadrature() -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for &(a, b) in &[(-0.5, -0.5), (0.0, 0.0), (0.3, -0.5), (-0.5, 0.3)] {
        for n in 1..=20 {
            let rule = gauss_jacobi_rule(a, b, n).map_err(|e| e.to_string())?;
            for k in 0..2 * n {
                // ∫ z^k (1-z)^a z^b dz = B(b+k+1, a+1)
                let exact = beta_fn(b + k as f64 + 1.0, a + 1.0).map_err(|e| e.to_string())?;
                let got = rule.integrate(|z| z.powi(k as i32));
                worst = worst.max(((got - exact) / exact).abs());
            }
        }
    }
    Ok(worst)
}

fn check_orthogonality() -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for &(a, b) in &[(-0.5, -0.5), (0.0, 0.0), (-0.5, -2.0 / 3.0)] {
        let rule = gauss_jacobi_rule(a, b, 40).map_err(|e| e.to_string())?;
        let consts = crate::fractional_basis::BasisConstants::new(a, b);
        let vals: Vec<Vec<f64>> = (0..=12)
            .map(|n| {
                rule.nodes
                    .iter()
                    .map(|&z| jacobi_eval(a, b, n, 2.0 * z - 1.0).0)
                    .collect()
            })
            .collect();
        for n in 0..=12 {
            let gn = consts.gamma_hat(n).map_err(|e| e.to_string())?;
            for m in 0..=12 {
                let ip: f64 = (0..rule.len())
                    .map(|q| vals[n][q] * vals[m][q] * rule.weights[q])
                    .sum();
                let target = if n == m { gn } else { 0.0 };
                worst = worst.max((ip - target).abs());
            }
        }
    }
    Ok(worst)
}

/// `P_n^{(a,b)}(t)` and `dP/dt` from the three-term recurrence differentiated
/// term by term; independent of the shifted-parameter derivative identity.
pub fn jacobi_by_differentiated_recurrence(a: f64, b: f64, n: usize, t: f64) -> (f64, f64) {
    let ab = a + b;
    let (mut p0, mut d0) = (1.0, 0.0);
    if n == 0 {
        return (p0, d0);
    }
    let (mut p1, mut d1) = ((a + 1.0) + 0.5 * (ab + 2.0) * (t - 1.0), 0.5 * (ab + 2.0));
    for k in 2..=n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        let c0 = 2.0 * kf * (kf + ab) * (s - 2.0);
        let c1 = (s - 1.0) * (s * (s - 2.0) * t + a * a - b * b);
        let c1_dt = (s - 1.0) * s * (s - 2.0);
        let c2 = 2.0 * (kf + a - 1.0) * (kf + b - 1.0) * s;
        let p2 = (c1 * p1 - c2 * p0) / c0;
        let d2 = (c1_dt * p1 + c1 * d1 - c2 * d0) / c0;
        (p0, d0, p1, d1) = (p1, d1, p2, d2);
    }
    (p1, d1)
}

fn check_derivative_recursion() -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for &(a, b) in &[(-0.5, -0.5), (0.0, 0.0), (0.3, -0.6)] {
        for n in 1..=12 {
            for k in 0..25 {
                let t = -1.0 + 2.0 * (k as f64 + 0.5) / 25.0;
                // D_lambda = d/dz = 2 d/dt with t = 2z - 1
                let lhs = 2.0 * jacobi_by_differentiated_recurrence(a, b, n, t).1;
                let rhs = (n as f64 + a + b + 1.0) * jacobi_eval(a + 1.0, b + 1.0, n - 1, t).0;
                worst = worst.max((lhs - rhs).abs() / rhs.abs().max(1.0));
            }
        }
    }
    Ok(worst)
}

fn check_interpolation() -> Result<f64, String> {
    let lambda = 1.0 / 3.0;
    let cfg = BasisConfig::new(-0.5, -0.5, lambda, 10).map_err(|e| e.to_string())?;
    let basis = build_fractional_basis(cfg).map_err(|e| e.to_string())?;
    // a λ-polynomial of degree 10
    let f = |x: f64| {
        let z = x.powf(lambda);
        (0..=10)
            .map(|k| (k as f64 + 1.0).recip() * z.powi(k))
            .sum::<f64>()
    };
    let nodal: Vec<f64> = basis.x_nodes.iter().map(|&x| f(x)).collect();
    Ok((0..=200)
        .map(|k| {
            let x = k as f64 / 200.0;
            (lagrange_eval(&basis, &nodal, x) - f(x)).abs()
        })
        .fold(0.0, f64::max))
}

fn check_constant_solve() -> Result<f64, String> {
    let mu = 0.5;
    let p = VieProblem::from_fns(mu, |_, _| 1.0, move |x| 1.0 - x.powf(1.0 - mu) / (1.0 - mu))
        .map_err(|e| e.to_string())?;
    let cfg = BasisConfig::new(-0.5, -0.5, 0.5, 16).map_err(|e| e.to_string())?;
    let sol = solve_with(&p, cfg).map_err(|e| e.to_string())?;
    let err = (0..=1000)
        .map(|k| (sol.evaluate(k as f64 / 1000.0) - 1.0).abs())
        .fold(0.0, f64::max);
    let res = residual(&sol, &p, 50, 68).map_err(|e| e.to_string())?;
    Ok(err.max(res))
}

/// Built-in invariant suite run by `fracvie verify`.
pub fn verify_suite() -> Vec<CheckResult> {
    vec![
        check("quadrature exactness", check_quadrature(), 1e-11),
        check("orthogonality", check_orthogonality(), 1e-10),
        check("derivative recursion", check_derivative_recursion(), 1e-10),
        check("interpolation exactness", check_interpolation(), 1e-11),
        check("manufactured constant solve", check_constant_solve(), 1e-10),
    ]
}
