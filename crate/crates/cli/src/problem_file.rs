//! `key=value` problem definitions:
//!
//! ```text
//! # comments and blank lines are ignored
//! mu=0.5
//! kernel=exp(x - s)
//! source=1
//! exact=...            (optional, in x)
//! exact_at_zero=0      (optional)
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use fracvie::expr::{parse, Expr};
use fracvie::vie_solver::{FnError, KernelFn, ScalarFn};
use fracvie::{ExactSolution, SolverError, VieProblem};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProblemFileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Line {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: missing required key `{key}`")]
    Missing { path: PathBuf, key: &'static str },
    #[error("{path}: {source}")]
    Problem {
        path: PathBuf,
        #[source]
        source: SolverError,
    },
}

const KEYS: [&str; 5] = ["mu", "kernel", "source", "exact", "exact_at_zero"];

struct Entry {
    value: String,
    line: usize,
}

fn fn_error(e: fracvie::EvalError) -> FnError {
    FnError::new(e.to_string())
}

pub fn load_problem_file(path: &Path) -> Result<VieProblem, ProblemFileError> {
    let text = fs::read_to_string(path).map_err(|source| ProblemFileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let line_err = |line: usize, message: String| ProblemFileError::Line {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut entries: [Option<Entry>; 5] = Default::default();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| line_err(line, "expected key=value".into()))?;
        let key = key.trim();
        let slot = KEYS
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| line_err(line, format!("unknown key `{key}`")))?;
        if entries[slot].is_some() {
            return Err(line_err(line, format!("duplicate key `{key}`")));
        }
        entries[slot] = Some(Entry {
            value: value.trim().to_string(),
            line,
        });
    }
    let [mu, kernel, source, exact, exact_at_zero] = entries;
    let required = |e: Option<Entry>, key| {
        e.ok_or(ProblemFileError::Missing {
            path: path.to_path_buf(),
            key,
        })
    };
    let mu = required(mu, "mu")?;
    let kernel = required(kernel, "kernel")?;
    let source = required(source, "source")?;
    let number = |e: &Entry| -> Result<f64, ProblemFileError> {
        e.value
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| line_err(e.line, format!("`{}` is not a finite number", e.value)))
    };
    let compile = |e: &Entry, vars: &[&str]| -> Result<Expr, ProblemFileError> {
        parse(&e.value, vars).map_err(|err| line_err(e.line, err.to_string()))
    };

    let mu_value = number(&mu)?;
    let k = compile(&kernel, &["x", "s"])?;
    let g = compile(&source, &["x"])?;
    let kernel_fn: KernelFn = Arc::new(move |x, s| k.eval_slots(&[x, s]).map_err(fn_error));
    let source_fn: ScalarFn = Arc::new(move |x| g.eval_slots(&[x]).map_err(fn_error));
    let mut problem = VieProblem::new(mu_value, kernel_fn, source_fn).map_err(|source| {
        ProblemFileError::Problem {
            path: path.to_path_buf(),
            source,
        }
    })?;
    match (exact, exact_at_zero) {
        (Some(e), at_zero) => {
            let u = compile(&e, &["x"])?;
            let at_zero = at_zero.as_ref().map(number).transpose()?;
            let f: ScalarFn = Arc::new(move |x| u.eval_slots(&[x]).map_err(fn_error));
            problem = problem.with_exact(ExactSolution::new(f, at_zero));
        }
        (None, Some(z)) => {
            return Err(line_err(z.line, "exact_at_zero given without exact".into()));
        }
        (None, None) => {}
    }
    Ok(problem)
}
