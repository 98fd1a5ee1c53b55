//! Conservative finite-volume m-Laplacian on a graded grid.
//!
//! With `Du` the divided difference on each interval and `w` the radial
//! weight at its midpoint, the flux is `Φ = w (|Du|² + ε²)^{(m-2)/2} Du` and
//! the operator at a free node is `-(Φ_{i+1/2} - Φ_{i-1/2}) / V_i`, where `V_i`
//! is the exact `r^{N-1}`-measure of the dual cell. The ball center carries zero flux on its left.
//! This is exactly the gradient of the discrete energy in the `V`-weighted
//! pairing, which is what the Newton solver relies on.

use crate::error::Result;
use crate::grid::{same_grid, GridFunction};

/// Weighted midpoint fluxes, one per interval.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxField {
    pub midpoint_fluxes: Vec<f64>,
}

/// `(s² + ε²)^{(m-2)/2} s`, the regularized `|s|^{m-2}s`.
#[inline]
pub fn flux_law(s: f64, m: f64, eps: f64) -> f64 {
    if eps == 0.0 {
        if s == 0.0 {
            return 0.0;
        }
        s.abs().powf(m - 2.0) * s
    } else {
        (s * s + eps * eps).powf(0.5 * (m - 2.0)) * s
    }
}

/// Derivative of [`flux_law`] in `s`.
#[inline]
pub fn flux_law_slope(s: f64, m: f64, eps: f64) -> f64 {
    let r2 = s * s + eps * eps;
    if r2 == 0.0 {
        // only reachable with eps = 0
        return if m > 2.0 { 0.0 } else { f64::INFINITY };
    }
    r2.powf(0.5 * (m - 4.0)) * ((m - 1.0) * s * s + eps * eps)
}

/// Antiderivative of [`flux_law`]: `(s² + ε²)^{m/2} / m`.
#[inline]
pub fn flux_potential(s: f64, m: f64, eps: f64) -> f64 {
    (s * s + eps * eps).powf(0.5 * m) / m
}

pub fn fluxes(u: &GridFunction, m: f64, eps: f64) -> FluxField {
    let grid = u.grid();
    let midpoint_fluxes = u
        .differences()
        .iter()
        .zip(grid.mid_weights())
        .map(|(&s, &w)| w * flux_law(s, m, eps))
        .collect();
    FluxField { midpoint_fluxes }
}

/// Discrete `-Δₘu` at every free node; Dirichlet entries are zero.
pub fn apply_mlap(u: &GridFunction, m: f64, eps: f64) -> Result<GridFunction> {
    let flux = fluxes(u, m, eps).midpoint_fluxes;
    let grid = u.grid();
    let vol = grid.volumes();
    let n = u.len();
    let mut out = vec![0.0; n];
    for i in grid.free_range() {
        let right = flux[i];
        let left = if i == 0 { 0.0 } else { flux[i - 1] };
        out[i] = -(right - left) / vol[i];
    }
    u.with_values(out)
}

/// `Σ_free V_i f_i v_i`, the pairing in which [`apply_mlap`] is an energy gradient.
pub fn pairing(f: &GridFunction, v: &GridFunction) -> Result<f64> {
    same_grid(f.grid(), v.grid())?;
    let grid = f.grid();
    let vol = grid.volumes();
    Ok(grid
        .free_range()
        .map(|i| vol[i] * f.values()[i] * v.values()[i])
        .sum())
}

/// `Σ h w |Du|^m / m − Σ V θ u`. Convex in `u` for `m > 1`.
pub fn energy(u: &GridFunction, theta: &GridFunction, m: f64) -> Result<f64> {
    energy_regularized(u, theta, m, 0.0)
}

/// [`energy`] with `|Du|^m` replaced by `(|Du|² + ε²)^{m/2}`.
pub fn energy_regularized(u: &GridFunction, theta: &GridFunction, m: f64, eps: f64) -> Result<f64> {
    same_grid(u.grid(), theta.grid())?;
    let grid = u.grid();
    Ok(gradient_energy(u.values(), grid, m, eps) - load(u.values(), theta.values(), grid))
}

pub(crate) fn gradient_energy(u: &[f64], grid: &crate::Grid1D, m: f64, eps: f64) -> f64 {
    u.windows(2)
        .zip(grid.widths())
        .zip(grid.mid_weights())
        .map(|((w, &h), &wt)| h * wt * flux_potential((w[1] - w[0]) / h, m, eps))
        .sum()
}

pub(crate) fn load(u: &[f64], theta: &[f64], grid: &crate::Grid1D) -> f64 {
    let vol = grid.volumes();
    grid.free_range().map(|i| vol[i] * theta[i] * u[i]).sum()
}
