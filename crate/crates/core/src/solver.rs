//! Dirichlet solves for `-Δₘu = θ` and the singular problem `-Δₘu = K u^{-p}`.
//!
//! The quasilinear problem is solved by minimizing the discrete energy with a
//! damped Newton method; the tridiagonal Hessian is positive definite as long
//! as the regularization `ε` is positive. `ε` is driven down a continuation
//! schedule, each stage warm-started from the previous one.
//!
//! The singular problem is solved by a monotone outer iteration started at a
//! certified subsolution. Each step linearizes the convex map `v ↦ K v^{-p}`
//! at the current iterate `u_k`:
//!
//! ```text
//! -Δₘu_{k+1} + M_k u_{k+1} = K u_k^{-p} + M_k u_k,   M_k = p K u_k^{-p-1}
//! ```
//!
//! Convexity makes every `u_{k+1}` again a subsolution with `u_k <= u_{k+1}`,
//! and keeps it below the solution, so the iterates increase to it.

use std::sync::Arc;

use crate::barriers::{self, Bracket};
use crate::error::{Error, Result};
use crate::grid::{same_grid, Grid1D, GridFunction};
use crate::linalg::solve_spd_tridiagonal;
use crate::operator::{flux_law, flux_law_slope, flux_potential};
use crate::problem::{validate_spec, ProblemSpec};

/// Armijo sufficient-decrease constant.
const ARMIJO: f64 = 1e-4;
/// Relative rounding allowance in energy comparisons.
const ENERGY_ROUNDING: f64 = 1e-13;
/// Multiple of the floating-point error bound of a node balance that is not
/// counted as residual.
const ROUNDING_FLOOR: f64 = 16.0;
/// Largest barrier constant tried when bracketing a singular solve.
pub const DEFAULT_C_MAX: f64 = 1_048_576.0; // 2^20

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Tolerance on the scaled residual (see [`SolveReport::final_residual`]).
    pub newton_tol: f64,
    /// Newton iterations allowed per continuation stage.
    pub max_newton_iters: usize,
    /// Regularization levels, strictly decreasing, ending at or below `1e-10`.
    pub eps_schedule: Vec<f64>,
    /// Backtracking factor of the line search.
    pub damping: f64,
    /// Sup-norm tolerance on successive outer iterates.
    pub picard_tol: f64,
    pub max_picard_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            max_newton_iters: 200,
            eps_schedule: (1..=10).map(|j| 10f64.powi(-j)).collect(),
            damping: 0.5,
            picard_tol: 1e-10,
            max_picard_iters: 200,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.newton_tol > 0.0) || !(self.picard_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.max_newton_iters == 0 || self.max_picard_iters == 0 {
            return bad("iteration budgets must be positive".into());
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return bad(format!("damping {} outside (0, 1)", self.damping));
        }
        let s = &self.eps_schedule;
        if s.is_empty() || s.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
            return bad("eps schedule must be non-empty and positive".into());
        }
        if s.windows(2).any(|w| !(w[1] < w[0])) {
            return bad("eps schedule must be strictly decreasing".into());
        }
        if *s.last().unwrap() > 1e-10 {
            return bad(format!("eps schedule ends at {} > 1e-10", s.last().unwrap()));
        }
        Ok(())
    }

    fn final_eps(&self) -> f64 {
        *self.eps_schedule.last().unwrap()
    }
}

/// Progress of one outer step of the singular iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterStep {
    /// `max |u_{k+1} - u_k|`
    pub sup_change: f64,
    /// `max (u_k - u_{k+1})`; non-positive for an increasing sequence.
    pub max_decrease: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: GridFunction,
    /// Newton iterations (Dirichlet) or outer iterations (singular).
    pub iterations: usize,
    /// Dirichlet solves: max over free nodes of `|r_i|` divided by the sum of
    /// the magnitudes of the terms balanced at node `i`, after discounting the
    /// floating-point error bound of that balance. Singular solves: the
    /// last sup-norm change between outer iterates.
    pub final_residual: f64,
    pub converged: bool,
    pub energy_history: Vec<f64>,
    /// Barrier pair used to start and bound a singular solve.
    pub bracket: Option<Bracket>,
    pub outer_steps: Vec<OuterStep>,
}

/// Quasilinear problem `-Δₘu + shift·u = θ`, as an energy on the free nodes.
struct Quasilinear<'a> {
    grid: &'a Grid1D,
    m: f64,
    theta: &'a [f64],
    shift: Option<&'a [f64]>,
}

impl Quasilinear<'_> {
    /// Energy and the sum of the magnitudes of its terms.
    fn energy(&self, u: &[f64], eps: f64) -> (f64, f64) {
        let g = self.grid;
        let mut total = 0.0;
        let mut scale = 0.0;
        for ((w, &h), &wt) in u.windows(2).zip(g.widths()).zip(g.mid_weights()) {
            let e = h * wt * flux_potential((w[1] - w[0]) / h, self.m, eps);
            total += e;
            scale += e.abs();
        }
        let vol = g.volumes();
        for i in g.free_range() {
            let mut e = -vol[i] * self.theta[i] * u[i];
            if let Some(s) = self.shift {
                e += 0.5 * vol[i] * s[i] * u[i] * u[i];
            }
            total += e;
            scale += e.abs();
        }
        (total, scale)
    }

    fn fluxes(&self, u: &[f64], eps: f64) -> Vec<f64> {
        let g = self.grid;
        u.windows(2)
            .zip(g.widths())
            .zip(g.mid_weights())
            .map(|((w, &h), &wt)| wt * flux_law((w[1] - w[0]) / h, self.m, eps))
            .collect()
    }

    /// Gradient on the free nodes and the scaled residual.
    ///
    /// Where fluxes nearly cancel, evaluating a node balance in floating point
    /// carries an error of about `eps_mach · Σ stiffness · |u|`, which can
    /// exceed the tolerance times the balanced terms on fine grids. That part
    /// of `|g_i|` is discounted before scaling.
    fn gradient(&self, u: &[f64], eps: f64) -> (Vec<f64>, f64) {
        let g = self.grid;
        let flux = self.fluxes(u, eps);
        let stiff = self.stiffness(u, eps);
        let vol = g.volumes();
        let free = g.free_range();
        let mut grad = Vec::with_capacity(free.len());
        let mut worst: f64 = 0.0;
        for i in free {
            let left = if i == 0 { 0.0 } else { flux[i - 1] };
            let right = flux[i];
            let load = vol[i] * self.theta[i];
            let react = self.shift.map_or(0.0, |s| vol[i] * s[i] * u[i]);
            let gi = left - right + react - load;
            let scale = left.abs() + right.abs() + load.abs() + react.abs();
            let mut roundoff = stiff[i] * (u[i].abs() + u[i + 1].abs()) + scale;
            if i > 0 {
                roundoff += stiff[i - 1] * (u[i - 1].abs() + u[i].abs());
            }
            let excess = gi.abs() - ROUNDING_FLOOR * f64::EPSILON * roundoff;
            if excess > 0.0 {
                worst = worst.max(excess / scale.max(f64::MIN_POSITIVE));
            }
            grad.push(gi);
        }
        (grad, worst)
    }

    /// `w Φ'(Du) / h` per interval.
    fn stiffness(&self, u: &[f64], eps: f64) -> Vec<f64> {
        let g = self.grid;
        u.windows(2)
            .zip(g.widths())
            .zip(g.mid_weights())
            .map(|((w, &h), &wt)| wt * flux_law_slope((w[1] - w[0]) / h, self.m, eps) / h)
            .collect()
    }

    /// Diagonal and off-diagonal of the Hessian on the free nodes.
    fn hessian(&self, u: &[f64], eps: f64) -> (Vec<f64>, Vec<f64>) {
        let g = self.grid;
        let stiff = self.stiffness(u, eps);
        let free = g.free_range();
        let vol = g.volumes();
        let mut diag = Vec::with_capacity(free.len());
        let mut off = Vec::with_capacity(free.len().saturating_sub(1));
        for i in free.clone() {
            let mut d = stiff[i];
            if i > 0 {
                d += stiff[i - 1];
            }
            if let Some(s) = self.shift {
                d += vol[i] * s[i];
            }
            diag.push(d);
            if i + 1 < free.end {
                off.push(-stiff[i]);
            }
        }
        (diag, off)
    }

    /// Damped Newton at fixed `eps`. Returns the final scaled residual and
    /// whether it reached the tolerance.
    fn newton_stage(
        &self,
        u: &mut [f64],
        eps: f64,
        cfg: &SolverConfig,
        history: &mut Vec<f64>,
        iterations: &mut usize,
    ) -> Result<(f64, bool)> {
        let free = self.grid.free_range();
        let mut trial = u.to_vec();
        let (mut e0, mut scale0) = self.energy(u, eps);
        history.push(e0);
        for _ in 0..cfg.max_newton_iters {
            let (grad, res) = self.gradient(u, eps);
            if res <= cfg.newton_tol {
                return Ok((res, true));
            }
            let (diag, off) = self.hessian(u, eps);
            let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
            let step = solve_spd_tridiagonal(&diag, &off, &neg, free.start)?;
            let slope: f64 = grad.iter().zip(&step).map(|(g, d)| g * d).sum();
            *iterations += 1;

            let mut alpha = 1.0;
            let accepted = loop {
                for (k, i) in free.clone().enumerate() {
                    trial[i] = u[i] + alpha * step[k];
                }
                let (e1, scale1) = self.energy(&trial, eps);
                let allowance = ENERGY_ROUNDING * scale0.max(scale1);
                if e1.is_finite() && e1 <= e0 + ARMIJO * alpha * slope + allowance {
                    e0 = e1;
                    scale0 = scale1;
                    break true;
                }
                alpha *= cfg.damping;
                if alpha < 1e-16 {
                    break false;
                }
            };
            if !accepted {
                return Ok((res, false));
            }
            u[free.clone()].copy_from_slice(&trial[free.clone()]);
            history.push(e0);
        }
        let (_, res) = self.gradient(u, eps);
        Ok((res, res <= cfg.newton_tol))
    }

    fn solve(
        &self,
        init: Vec<f64>,
        cfg: &SolverConfig,
        warm: bool,
    ) -> Result<(Vec<f64>, usize, f64, bool, Vec<f64>)> {
        let mut u = init;
        let mut history = Vec::new();
        let mut iterations = 0;
        if warm {
            let eps = cfg.final_eps();
            let mut attempt = u.clone();
            let mut h = Vec::new();
            let mut it = 0;
            if let Ok((res, true)) = self.newton_stage(&mut attempt, eps, cfg, &mut h, &mut it) {
                return Ok((attempt, it, res, true, h));
            }
            // fall back to the full continuation from the same start
            iterations += it;
        }
        let mut last = (f64::INFINITY, false);
        for &eps in &cfg.eps_schedule {
            last = self.newton_stage(&mut u, eps, cfg, &mut history, &mut iterations)?;
        }
        Ok((u, iterations, last.0, last.1, history))
    }
}

fn check_exponent(m: f64) -> Result<()> {
    if m > 1.0 && m.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("operator exponent m = {m} must exceed 1")))
    }
}

fn check_finite_load(theta: &GridFunction) -> Result<()> {
    let grid = theta.grid();
    for i in grid.free_range() {
        if !theta.values()[i].is_finite() {
            return Err(Error::InvalidConfig(format!(
                "theta is not finite at interior node {i}"
            )));
        }
    }
    Ok(())
}

/// Solve `-Δₘu = θ`, `u = 0` on the boundary, from a zero start.
pub fn solve_dirichlet(theta: &GridFunction, m: f64, cfg: &SolverConfig) -> Result<SolveReport> {
    solve_dirichlet_from(theta, m, cfg, None)
}

/// [`solve_dirichlet`] warm-started from `initial`. A warm start runs only the
/// final regularization level and falls back to the full schedule if that
/// stage does not converge.
pub fn solve_dirichlet_from(
    theta: &GridFunction,
    m: f64,
    cfg: &SolverConfig,
    initial: Option<&GridFunction>,
) -> Result<SolveReport> {
    solve_shifted(theta, None, m, cfg, initial)
}

pub(crate) fn solve_shifted(
    theta: &GridFunction,
    shift: Option<&GridFunction>,
    m: f64,
    cfg: &SolverConfig,
    initial: Option<&GridFunction>,
) -> Result<SolveReport> {
    check_exponent(m)?;
    cfg.validate()?;
    check_finite_load(theta)?;
    let grid = theta.grid().clone();
    if let Some(s) = shift {
        same_grid(&grid, s.grid())?;
    }
    let init = match initial {
        Some(u0) => {
            same_grid(&grid, u0.grid())?;
            let mut v = u0.clone();
            v.enforce_dirichlet();
            v.into_values()
        }
        None => vec![0.0; grid.len()],
    };
    let problem = Quasilinear {
        grid: &grid,
        m,
        theta: theta.values(),
        shift: shift.map(|s| s.values()),
    };
    let (u, iterations, residual, converged, energy_history) =
        problem.solve(init, cfg, initial.is_some())?;
    let report = SolveReport {
        solution: GridFunction::new(grid, u)?,
        iterations,
        final_residual: residual,
        converged,
        energy_history,
        bracket: None,
        outer_steps: Vec::new(),
    };
    if converged {
        Ok(report)
    } else {
        Err(Error::NonConvergence {
            iterations,
            residual,
            context: "quasilinear Dirichlet solve".into(),
            partial: Some(Box::new(report)),
        })
    }
}

/// `K` sampled at the free nodes (zero at Dirichlet nodes, where it is infinite).
pub fn sample_weight(spec: &ProblemSpec, grid: Arc<Grid1D>) -> GridFunction {
    GridFunction::sample_with_delta(grid, |x, d| spec.kappa(x) * d.powf(-spec.q))
}

/// Solve `-Δₘu = K u^{-p}` with `K` taken from the spec.
pub fn solve_singular(spec: &ProblemSpec, grid: Arc<Grid1D>, cfg: &SolverConfig) -> Result<SolveReport> {
    let weight = sample_weight(spec, grid);
    solve_singular_with_weight(spec, &weight, cfg)
}

/// Solve `-Δₘu = K u^{-p}` with an explicitly sampled weight. The exponents
/// and domain come from `spec`; its envelope is not used.
pub fn solve_singular_with_weight(
    spec: &ProblemSpec,
    weight: &GridFunction,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    let spec = validate_spec(*spec)?;
    cfg.validate()?;
    if weight.grid().domain() != spec.domain {
        return Err(Error::GridMismatch(format!(
            "grid domain {} does not match spec domain {}",
            weight.grid().domain(),
            spec.domain
        )));
    }
    let bracket = barriers::regime_bracket(&spec, weight, cfg, DEFAULT_C_MAX)?;
    let mut report = monotone_iteration(&spec, weight, &bracket, cfg)?;
    report.bracket = Some(bracket);
    Ok(report)
}

/// Discrete energy of the singular problem,
/// `Σ h w Ψ_ε(Du) - Σ V K G(u)` with `G' = u^{-p}`.
pub fn singular_energy(u: &GridFunction, weight: &GridFunction, m: f64, p: f64, eps: f64) -> f64 {
    let grid = u.grid();
    let vol = grid.volumes();
    let primitive = |v: f64| {
        if (p - 1.0).abs() < 1e-14 {
            v.ln()
        } else {
            v.powf(1.0 - p) / (1.0 - p)
        }
    };
    let grad = crate::operator::gradient_energy(u.values(), grid, m, eps);
    let reaction: f64 = grid
        .free_range()
        .map(|i| vol[i] * weight.values()[i] * primitive(u.values()[i]))
        .sum();
    grad - reaction
}

fn monotone_iteration(
    spec: &ProblemSpec,
    weight: &GridFunction,
    bracket: &Bracket,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    let grid = weight.grid().clone();
    let (m, p) = (spec.m, spec.p);
    let lower = bracket.lower.values();
    let upper = bracket.upper.values();
    let free = grid.free_range();
    let k = weight.values();

    let mut u = bracket.lower.clone();
    let mut history = vec![singular_energy(&u, weight, m, p, cfg.final_eps())];
    let mut steps = Vec::new();
    let mut change = f64::INFINITY;
    for iter in 1..=cfg.max_picard_iters {
        let mut load = vec![0.0; grid.len()];
        let mut shift = vec![0.0; grid.len()];
        for i in free.clone() {
            let v = u.values()[i].max(lower[i]);
            let f = k[i] * v.powf(-p);
            let slope = p * f / v;
            shift[i] = slope;
            load[i] = f + slope * v;
        }
        let load = GridFunction::new(grid.clone(), load)?;
        let shift = GridFunction::new(grid.clone(), shift)?;
        let next = solve_shifted(&load, Some(&shift), m, cfg, Some(&u))?.solution;

        let mut sup_change: f64 = 0.0;
        let mut max_decrease = f64::NEG_INFINITY;
        for i in free.clone() {
            let (a, b) = (u.values()[i], next.values()[i]);
            sup_change = sup_change.max((b - a).abs());
            max_decrease = max_decrease.max(a - b);
            let below = lower[i] - b;
            let above = b - upper[i];
            let excess = below.max(above);
            if excess > cfg.picard_tol {
                return Err(Error::BarrierOrderViolation { node: i, excess });
            }
        }
        steps.push(OuterStep {
            sup_change,
            max_decrease,
        });
        u = next;
        history.push(singular_energy(&u, weight, m, p, cfg.final_eps()));
        change = sup_change;
        if change <= cfg.picard_tol {
            return Ok(SolveReport {
                solution: u,
                iterations: iter,
                final_residual: change,
                converged: true,
                energy_history: history,
                bracket: None,
                outer_steps: steps,
            });
        }
    }
    let iterations = cfg.max_picard_iters;
    Err(Error::NonConvergence {
        iterations,
        residual: change,
        context: "monotone outer iteration".into(),
        partial: Some(Box::new(SolveReport {
            solution: u,
            iterations,
            final_residual: change,
            converged: false,
            energy_history: history,
            bracket: Some(bracket.clone()),
            outer_steps: steps,
        })),
    })
}
