//! Reference solutions computed without the discrete operator.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use mlap_core::{make_graded_grid, Domain, Grid1D, GridFunction};

pub fn interval(n: usize, grading: f64) -> Arc<Grid1D> {
    Arc::new(make_graded_grid(n, grading, Domain::Interval01).unwrap())
}

pub fn ball(n: usize, grading: f64, dim: usize) -> Arc<Grid1D> {
    Arc::new(make_graded_grid(n, grading, Domain::RadialBall { dim }).unwrap())
}

pub fn max_error(u: &GridFunction, exact: impl Fn(f64) -> f64) -> f64 {
    u.grid()
        .nodes()
        .iter()
        .zip(u.values())
        .map(|(&x, v)| (v - exact(x)).abs())
        .fold(0.0, f64::max)
}

/// `π_m = 2π / (m sin(π/m))`
pub fn pi_m(m: f64) -> f64 {
    2.0 * PI / (m * (PI / m).sin())
}

/// First Dirichlet eigenvalue of the 1D m-Laplacian on (0, 1), closed form.
pub fn eigenvalue_closed_form(m: f64) -> f64 {
    (m - 1.0) * pi_m(m).powf(m)
}

/// First eigenvalue by shooting: integrate `ϕ' = |w|^{1/(m-1)} sgn w`,
/// `w' = -λ|ϕ|^{m-2}ϕ` from `ϕ(0) = 0, w(0) = 1` with RK4 and bisect on `λ`
/// until `w(1/2) = 0` (symmetry of the first mode).
pub fn shoot_eigenvalue(m: f64, steps: usize) -> f64 {
    let inv = 1.0 / (m - 1.0);
    let rhs = |lambda: f64, phi: f64, w: f64| {
        (
            w.abs().powf(inv).copysign(w),
            -lambda * phi.abs().powf(m - 1.0).copysign(phi),
        )
    };
    let end_flux = |lambda: f64| {
        let h = 0.5 / steps as f64;
        let (mut phi, mut w) = (0.0f64, 1.0f64);
        for _ in 0..steps {
            let k1 = rhs(lambda, phi, w);
            let k2 = rhs(lambda, phi + 0.5 * h * k1.0, w + 0.5 * h * k1.1);
            let k3 = rhs(lambda, phi + 0.5 * h * k2.0, w + 0.5 * h * k2.1);
            let k4 = rhs(lambda, phi + h * k3.0, w + h * k3.1);
            phi += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            w += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        }
        w
    };
    // march up to the first sign change so higher modes stay out of the bracket
    let mut lo = 1.0f64;
    while end_flux(lo * 1.1) > 0.0 {
        lo *= 1.1;
    }
    let mut hi = lo * 1.1;
    for _ in 0..50 {
        let mid = (lo * hi).sqrt();
        if end_flux(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo * hi).sqrt()
}

/// `-Δₘu = 1` on (0, 1): `u = (m-1)/m [(1/2)^{m'} - |x - 1/2|^{m'}]`, `m' = m/(m-1)`.
pub fn torsion(m: f64, x: f64) -> f64 {
    let e = m / (m - 1.0);
    (m - 1.0) / m * (0.5f64.powf(e) - (x - 0.5).abs().powf(e))
}

/// Radial torsion on the unit ball in dimension `dim`.
pub fn radial_torsion(m: f64, dim: usize, r: f64) -> f64 {
    let e = m / (m - 1.0);
    (m - 1.0) / m * (dim as f64).powf(-1.0 / (m - 1.0)) * (1.0 - r.powf(e))
}

/// Solution of `-Δₘu = sin(πx)` on (0, 1). The flux is `cos(πx)/π`, so
/// `u(x) = ∫₀^δ (cos(πt)/π)^{1/(m-1)} dt`, evaluated by tanh-sinh quadrature.
pub fn sine_source_solution(m: f64, x: f64) -> f64 {
    let d = x.min(1.0 - x);
    if d <= 0.0 {
        return 0.0;
    }
    let inv = 1.0 / (m - 1.0);
    quadrature::integrate(|t| ((PI * t).cos() / PI).max(0.0).powf(inv), 0.0, d, 1e-14).integral
}

/// `-Δ(sin(πx)^{2/3})` in closed form.
pub fn sine_power_source(x: f64) -> f64 {
    let s = (PI * x).sin();
    let c = (PI * x).cos();
    let pi2 = PI * PI;
    2.0 / 9.0 * pi2 * c * c * s.powf(-4.0 / 3.0) + 2.0 / 3.0 * pi2 * s.powf(2.0 / 3.0)
}

pub fn sine_power_field(x: f64) -> f64 {
    (PI * x).sin().powf(2.0 / 3.0)
}

/// Empirical orders `log2(e_k / e_{k+1})` for grids that halve `h`.
pub fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}
