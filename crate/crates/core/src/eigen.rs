//! First Dirichlet eigenpair of the m-Laplacian,
//! `-Δₘϕ = λ|ϕ|^{m-2}ϕ`, by nonlinear inverse power iteration.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Grid1D, GridFunction};
use crate::operator::apply_mlap;
use crate::problem::Domain;
use crate::solver::{solve_dirichlet_from, SolverConfig};

/// Iteration budget of [`first_eigenpair`].
pub const MAX_EIGEN_ITERS: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    /// Positive in the interior, sup-norm exactly one.
    pub eigenfunction: GridFunction,
    pub eigenvalue: f64,
    pub m: f64,
    /// Sup-norm of `-Δₘϕ - λ|ϕ|^{m-2}ϕ` over the free nodes.
    pub residual: f64,
    pub iterations: usize,
}

/// `Σ h w |Dϕ|^m / Σ V |ϕ|^m`
pub fn rayleigh_quotient(phi: &GridFunction, m: f64) -> f64 {
    let grid = phi.grid();
    let num: f64 = phi
        .differences()
        .iter()
        .zip(grid.widths())
        .zip(grid.mid_weights())
        .map(|((s, h), w)| h * w * s.abs().powf(m))
        .sum();
    let vol = grid.volumes();
    let den: f64 = grid
        .free_range()
        .map(|i| vol[i] * phi.values()[i].abs().powf(m))
        .sum();
    num / den
}

/// Positive, unimodal starting field: `x(1-x)` or `1 - r²`.
pub fn default_start(grid: Arc<Grid1D>) -> GridFunction {
    match grid.domain() {
        Domain::Interval01 => GridFunction::sample_dirichlet(grid, |x| x * (1.0 - x)),
        Domain::RadialBall { .. } => GridFunction::sample_dirichlet(grid, |r| 1.0 - r * r),
    }
}

/// First eigenpair; stops when the relative change of `λ` is at most `tol`.
pub fn first_eigenpair(grid: Arc<Grid1D>, m: f64, tol: f64) -> Result<EigenPair> {
    let start = default_start(grid);
    first_eigenpair_from(&start, m, tol, &SolverConfig::default())
}

/// [`first_eigenpair`] from a chosen positive start and solver configuration.
pub fn first_eigenpair_from(
    start: &GridFunction,
    m: f64,
    tol: f64,
    cfg: &SolverConfig,
) -> Result<EigenPair> {
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!("eigen tolerance {tol} must be positive")));
    }
    let mut phi = start.clone();
    phi.enforce_dirichlet();
    check_positive(&phi)?;
    normalize(&mut phi);

    let mut psi: Option<GridFunction> = None;
    let mut lambda = f64::NAN;
    for iter in 1..=MAX_EIGEN_ITERS {
        let rhs = phi.map(|v| v.abs().powf(m - 2.0) * v);
        let next = solve_dirichlet_from(&rhs, m, cfg, psi.as_ref())?.solution;
        check_positive(&next)?;
        let new_lambda = rayleigh_quotient(&next, m);
        phi = next.clone();
        normalize(&mut phi);
        psi = Some(next);
        let done = (new_lambda - lambda).abs() <= tol * new_lambda;
        lambda = new_lambda;
        if done {
            let residual = eigen_residual(&phi, lambda, m)?;
            return Ok(EigenPair {
                eigenfunction: phi,
                eigenvalue: lambda,
                m,
                residual,
                iterations: iter,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_EIGEN_ITERS,
        residual: f64::NAN,
        context: "inverse power iteration".into(),
        partial: None,
    })
}

/// Sup-norm of `-Δₘϕ - λ|ϕ|^{m-2}ϕ` at the free nodes.
pub fn eigen_residual(phi: &GridFunction, lambda: f64, m: f64) -> Result<f64> {
    let lap = apply_mlap(phi, m, 0.0)?;
    Ok(phi
        .grid()
        .free_range()
        .map(|i| {
            let v = phi.values()[i];
            (lap.values()[i] - lambda * v.abs().powf(m - 2.0) * v).abs()
        })
        .fold(0.0, f64::max))
}

fn check_positive(u: &GridFunction) -> Result<()> {
    for i in u.grid().free_range() {
        if !(u.values()[i] > 0.0) {
            return Err(Error::SignChange { node: i });
        }
    }
    Ok(())
}

fn normalize(u: &mut GridFunction) {
    let top = u.sup_norm();
    for v in u.values_mut() {
        *v /= top;
    }
    // the maximum is exactly one after division
    let (i, _) = u.argmax();
    u.values_mut()[i] = 1.0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_graded_grid;
    use std::f64::consts::PI;

    #[test]
    fn laplacian_eigenpair() {
        let grid = Arc::new(make_graded_grid(257, 1.0, Domain::Interval01).unwrap());
        let pair = first_eigenpair(grid.clone(), 2.0, 1e-12).unwrap();
        assert_eq!(pair.eigenfunction.sup_norm(), 1.0);
        assert!((pair.eigenvalue - PI * PI).abs() / (PI * PI) < 1e-4);
        for (x, v) in grid.nodes().iter().zip(pair.eigenfunction.values()) {
            assert!((v - (PI * x).sin()).abs() < 1e-4);
        }
        assert!(pair.residual < 1e-6 * pair.eigenvalue, "{}", pair.residual);
    }

    #[test]
    fn rejects_sign_changing_start() {
        let grid = Arc::new(make_graded_grid(65, 1.0, Domain::Interval01).unwrap());
        let start = GridFunction::sample(grid, |x| (2.0 * PI * x).sin());
        let err = first_eigenpair_from(&start, 2.0, 1e-8, &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, Error::SignChange { .. }));
    }
}
