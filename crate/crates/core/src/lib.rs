//! Fractional (Müntz) Jacobi spectral collocation for second-kind Volterra
//! integral equations with a weakly singular kernel `(x - s)^(-mu)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`special_functions`]: Gamma/Beta, Jacobi recurrences, Gauss–Jacobi rules.
//! * [`fractional_basis`]: fractional Jacobi polynomials and the barycentric
//!   Lagrange basis in the mapped variable `z = x^lambda`.
//! * [`approximation_ops`]: weighted inner products, projection, interpolation
//!   and error norms.
//! * [`linalg`]: dense LU with partial pivoting and a 1-norm condition estimate.
//! * [`vie_solver`]: assembly and solution of the collocation system.
//! * [`expr`]: a small expression language for user-defined kernels and sources.
//! * [`experiments`]: the problem catalog, convergence sweeps, rate fits and CSV
//!   output.

// `!(x > a)` deliberately rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod special_functions;

pub use special_functions::{
    bessel_series, beta_fn, gamma, gauss_jacobi_rule, jacobi_eval, jacobi_recurrence, ln_gamma,
    QuadratureRule, SpecialError,
};
pub mod fractional_basis;

pub use fractional_basis::{
    build_fractional_basis, frac_jacobi_eval, frac_jacobi_lambda_deriv, lagrange_eval,
    lebesgue_constant, BasisConfig, BasisConstants, BasisError, FractionalBasis,
};
pub mod approximation_ops;

pub use approximation_ops::{
    error_norms, interpolate, project, weighted_inner_product, ApproxError, ErrorNorms,
    WeightedNorm, WeightedNormSpec,
};
pub mod linalg;

pub use linalg::{lu_solve, DenseMatrix, LinalgError, LuFactors};
pub mod vie_solver;

pub use vie_solver::{
    assemble, residual, solve, solve_with, CollocationSystem, Diagnostics, Discretization,
    ExactSolution, FnError, Solution, SolverError, VieProblem,
};
pub mod expr;

pub use expr::{parse, EvalError, Expr, ParseError};
pub mod experiments;

pub use experiments::{
    catalog, fit_rates, fit_rates_with_floor, read_csv, sweep, sweep_problem, write_csv,
    CatalogEntry, ConvergenceRecord, ConvergenceReport, ExperimentError, FitKind, RateFit,
    ReferencePolicy,
};
