//! Command-line front end: argument parsing, problem selection and report output.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fracvie::experiments::{
    auto_file_name, find_entry, sweep_problem, verify_suite, write_csv, ConvergenceReport, RateFit,
    ReferencePolicy, SweepParams,
};
use fracvie::VieProblem;
use thiserror::Error;

pub mod problem_file;

pub use problem_file::{load_problem_file, ProblemFileError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

/// Reference N for problem files without an exact solution.
pub const DEFAULT_REFERENCE_N: usize = 80;

#[derive(Debug, Parser)]
#[command(
    name = "fracvie",
    version,
    about = "Fractional Jacobi collocation for weakly singular Volterra equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve at a single N and report errors.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        n: usize,
    },
    /// Solve over a range of N and fit convergence rates.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long, default_value_t = 1)]
        n_step: usize,
        /// Fit window `lo:hi` (defaults to the whole range).
        #[arg(long, value_parser = parse_window)]
        fit_window: Option<(usize, usize)>,
    },
    /// Run the built-in invariant checks.
    Verify,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct CommonArgs {
    /// Catalog id (ex1, ex2, ex3, ex4i, ex4ii, ex4iii) or a problem file.
    #[arg(long)]
    problem: String,
    /// Required for catalog problems; overrides `mu=` in a problem file.
    #[arg(long)]
    mu: Option<f64>,
    /// Decimal or rational literal such as `1/6`.
    #[arg(long, value_parser = parse_lambda)]
    lambda: f64,
    #[arg(long, default_value_t = -0.5)]
    alpha: f64,
    #[arg(long, default_value_t = -0.5)]
    beta: f64,
    /// CSV output file, or a directory for an auto-named file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `exact`, `auto`, or a reference N.
    #[arg(long, default_value = "auto", value_parser = parse_reference)]
    reference: ReferenceChoice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceChoice {
    Exact,
    Auto,
    HighN(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSelector {
    Catalog(String),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunParams {
    pub problem: ProblemSelector,
    pub mu: Option<f64>,
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub n_list: Vec<usize>,
    pub fit_window: Option<(usize, usize)>,
    pub out: Option<PathBuf>,
    pub reference: ReferenceChoice,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunConfig {
    Solve(RunParams),
    Sweep(RunParams),
    Verify,
}

#[derive(Debug, Error)]
pub enum CliError {
    /// Argument syntax errors, and `--help`/`--version` output.
    #[error("{}", .0.render())]
    Clap(#[from] clap::Error),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    ProblemFile(#[from] ProblemFileError),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Clap(e) if !e.use_stderr() => EXIT_OK,
            CliError::Clap(_) | CliError::Usage(_) | CliError::ProblemFile(_) => EXIT_USAGE,
            CliError::Numeric(_) | CliError::Io(_) => EXIT_NUMERIC,
        }
    }
}

/// Parses `p/q` exactly as the quotient of two literals, or a plain decimal.
pub fn parse_lambda(s: &str) -> Result<f64, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("invalid number `{t}`"))
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let (p, q) = (num(p)?, num(q)?);
            if q == 0.0 {
                return Err("zero denominator".into());
            }
            Ok(p / q)
        }
        None => num(s),
    }
}

fn parse_window(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    let p = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("invalid count `{t}`"))
    };
    let (lo, hi) = (p(lo)?, p(hi)?);
    if lo > hi {
        return Err(format!("empty window {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn parse_reference(s: &str) -> Result<ReferenceChoice, String> {
    match s {
        "exact" => Ok(ReferenceChoice::Exact),
        "auto" => Ok(ReferenceChoice::Auto),
        _ => s
            .parse()
            .map(ReferenceChoice::HighN)
            .map_err(|_| format!("expected exact, auto or a count, got `{s}`")),
    }
}

fn validate(
    common: CommonArgs,
    n_list: Vec<usize>,
    fit_window: Option<(usize, usize)>,
) -> Result<RunParams, CliError> {
    let usage = |m: String| Err(CliError::Usage(m));
    if !(common.lambda > 0.0 && common.lambda <= 1.0) {
        return usage(format!(
            "--lambda must lie in (0, 1], got {}",
            common.lambda
        ));
    }
    if let Some(mu) = common.mu {
        if !(mu > 0.0 && mu < 1.0) {
            return usage(format!("--mu must lie in (0, 1), got {mu}"));
        }
    }
    for (name, v) in [("alpha", common.alpha), ("beta", common.beta)] {
        if !(v > -1.0 && v.is_finite()) {
            return usage(format!("--{name} must be finite and > -1, got {v}"));
        }
    }
    if n_list.is_empty() {
        return usage("the N range is empty".into());
    }
    let problem = if find_entry(&common.problem).is_ok() {
        if common.mu.is_none() {
            return usage(format!(
                "--mu is required for catalog problem `{}`",
                common.problem
            ));
        }
        ProblemSelector::Catalog(common.problem)
    } else {
        ProblemSelector::File(PathBuf::from(common.problem))
    };
    Ok(RunParams {
        problem,
        mu: common.mu,
        lambda: common.lambda,
        alpha: common.alpha,
        beta: common.beta,
        n_list,
        fit_window,
        out: common.out,
        reference: common.reference,
    })
}

/// Parses and validates the argument list (including the program name).
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    match cli.command {
        Command::Verify => Ok(RunConfig::Verify),
        Command::Solve { common, n } => validate(common, vec![n], None).map(RunConfig::Solve),
        Command::Sweep {
            common,
            n_min,
            n_max,
            n_step,
            fit_window,
        } => {
            if n_step == 0 {
                Err(CliError::Usage("--n-step must be positive".into()))
            } else {
                let ns = (n_min..=n_max).step_by(n_step).collect();
                validate(common, ns, fit_window).map(RunConfig::Sweep)
            }
        }
    }
}

fn load(params: &RunParams) -> Result<(String, VieProblem, ReferencePolicy), CliError> {
    let (id, problem, default_policy) = match &params.problem {
        ProblemSelector::Catalog(id) => {
            let entry = find_entry(id).map_err(|e| CliError::Usage(e.to_string()))?;
            let mu = params.mu.expect("validated");
            let problem = entry
                .problem(mu)
                .map_err(|e| CliError::Numeric(e.to_string()))?;
            (id.clone(), problem, entry.reference_policy)
        }
        ProblemSelector::File(path) => {
            let mut problem = load_problem_file(path)?;
            if let Some(mu) = params.mu {
                problem.mu = mu;
            }
            let id = path.file_stem().map_or_else(
                || "problem".to_string(),
                |s| s.to_string_lossy().into_owned(),
            );
            let policy = if problem.exact.is_some() {
                ReferencePolicy::Exact
            } else {
                ReferencePolicy::HighN(DEFAULT_REFERENCE_N)
            };
            (id, problem, policy)
        }
    };
    let policy = match params.reference {
        ReferenceChoice::Auto => default_policy,
        ReferenceChoice::Exact if problem.exact.is_none() => {
            return Err(CliError::Usage(format!(
                "problem `{id}` has no exact solution"
            )));
        }
        ReferenceChoice::Exact => ReferencePolicy::Exact,
        ReferenceChoice::HighN(n) => ReferencePolicy::HighN(n),
    };
    Ok((id, problem, policy))
}

fn fit_line(column: &str, f: &RateFit) -> String {
    format!(
        "FIT {column} loglog={:.4} semilog={:.4} r2_loglog={:.4} r2_semilog={:.4} preferred={}",
        f.slope_loglog, f.slope_semilog, f.r2_loglog, f.r2_semilog, f.preferred
    )
}

fn csv_path(out: &Path, report: &ConvergenceReport) -> PathBuf {
    if out.is_dir() {
        out.join(auto_file_name(report))
    } else {
        out.to_path_buf()
    }
}

fn run_params(params: &RunParams, fit: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let (id, problem, policy) = load(params)?;
    let sweep_params = SweepParams {
        lambda: params.lambda,
        alpha: params.alpha,
        beta: params.beta,
    };
    let report = sweep_problem(&id, &problem, policy, sweep_params, &params.n_list)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    writeln!(
        out,
        "# problem={id} mu={} lambda={} alpha={} beta={} reference={}",
        problem.mu, params.lambda, params.alpha, params.beta, report.reference
    )
    .map_err(io)?;
    for r in &report.records {
        writeln!(
            out,
            "REC N={} linf={:e} l2w={:e} assemble_ms={:.3} solve_ms={:.3} cond={:.3e}",
            r.n, r.linf, r.l2w, r.assemble_ms, r.solve_ms, r.cond
        )
        .map_err(io)?;
    }
    if let Some(path) = &params.out {
        let path = csv_path(path, &report);
        write_csv(&report, &path).map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(out, "# wrote {}", path.display()).map_err(io)?;
    }
    if let Some(f) = &report.failure {
        return Err(CliError::Numeric(format!(
            "solve failed at N = {}: {}",
            f.n, f.message
        )));
    }
    if fit {
        let window = params.fit_window.unwrap_or((0, usize::MAX));
        match report.fit(window) {
            Ok(f) => {
                writeln!(out, "{}", fit_line("linf", &f.linf)).map_err(io)?;
                writeln!(out, "{}", fit_line("l2w", &f.l2w)).map_err(io)?;
            }
            Err(e) => writeln!(out, "# no fit: {e}").map_err(io)?,
        }
    }
    Ok(())
}

fn run_verify(out: &mut dyn Write) -> Result<bool, CliError> {
    let mut ok = true;
    for c in verify_suite() {
        ok &= c.passed;
        let tag = if c.passed { "PASS" } else { "FAIL" };
        writeln!(out, "CHECK {tag} {}: {}", c.name, c.detail)
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(ok)
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match parse_args(argv) {
        Ok(c) => c,
        Err(CliError::Clap(e)) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return e.exit_code();
        }
    };
    let result = match &config {
        RunConfig::Verify => match run_verify(out) {
            Ok(true) => return EXIT_OK,
            Ok(false) => return EXIT_VERIFY,
            Err(e) => Err(e),
        },
        RunConfig::Solve(p) => run_params(p, false, out),
        RunConfig::Sweep(p) => run_params(p, true, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
