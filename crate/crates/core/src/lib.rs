//! Finite-volume solver and diagnostics for the singular quasilinear Dirichlet
//! problem `-Δₘu = K(x) u^{-p}` with `K ~ δ^{-q}` near the boundary.
//!
//! Problems live on the unit interval or on a ball with radial symmetry; in
//! both cases the discretization is a one-dimensional graded grid.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod analyzer;
pub mod barriers;
pub mod eigen;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod operator;
pub mod problem;
pub mod solver;

pub use analyzer::{
    distance_integral_classify, fit_boundary_exponent, fit_log_correction, sobolev_seminorm,
    threshold_scan, FitResult, IntegralVerdict, ScanReport, ScanSource, Verdict,
};
pub use barriers::{
    auto_scale, build_barrier, check_barrier, BarrierBase, BarrierFamily, BarrierSpec, Bracket,
    Certificate, Rhs, Side,
};
pub use eigen::{first_eigenpair, EigenPair};
pub use error::{Admissibility, Error, Result};
pub use grid::{make_graded_grid, Grid1D, GridFunction, DEFAULT_GRADING};
pub use operator::{apply_mlap, energy, FluxField};
pub use problem::{classify_regime, validate_spec, Domain, HolderClass, ProblemSpec, Regime, RegimeReport};
pub use solver::{solve_dirichlet, solve_singular, SolveReport, SolverConfig};
