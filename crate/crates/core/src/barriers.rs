//! Sub- and supersolution barriers built from a positive base profile,
//! their numerical certification, and the search for a certifying scale.
//!
//! A barrier is `c^{±1} b^γ` (power family) or `c^{±1} b log^s(A/b)` (log
//! family), where `b` is a normalized base profile: the first eigenfunction,
//! or in the subcritical regime the solution of `-Δₘζ = δ^{-(p+q)}`.
//! Sub barriers divide by `c`, super barriers multiply by it.

use std::sync::Arc;

use crate::eigen::{first_eigenpair_from, default_start, EigenPair};
use crate::error::{Error, Result};
use crate::grid::{same_grid, Grid1D, GridFunction};
use crate::operator::apply_mlap;
use crate::problem::{classify_regime, Domain, ProblemSpec, Regime};
use crate::solver::{solve_dirichlet, SolverConfig};

/// Nodes this many cells from a Dirichlet boundary are not checked.
pub const BOUNDARY_SKIP: usize = 2;
/// Default relative slack of a certificate.
pub const DEFAULT_SLACK: f64 = 1e-8;
/// Tolerance of the eigen-solves behind regime barriers.
pub const BASE_EIGEN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Sub,
    Super,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Sub => "sub",
            Side::Super => "super",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BarrierFamily {
    /// `b^γ`, `0 < γ <= 1`.
    Power { exponent: f64 },
    /// `b log^s(A/b)`, `s > 0`, `A > max b`.
    LogPower { exponent: f64, scale: f64 },
}

impl std::fmt::Display for BarrierFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BarrierFamily::Power { exponent } => write!(f, "power({exponent})"),
            BarrierFamily::LogPower { exponent, scale } => write!(f, "log-power({exponent}, A={scale})"),
        }
    }
}

/// The positive profile barriers are built from.
#[derive(Debug, Clone, PartialEq)]
pub enum BarrierBase {
    Eigen(EigenPair),
    /// Solution of `-Δₘζ = δ^{-a}` normalized to sup-norm one.
    DistanceTorsion { a: f64, m: f64, profile: GridFunction },
}

impl BarrierBase {
    pub fn profile(&self) -> &GridFunction {
        match self {
            BarrierBase::Eigen(pair) => &pair.eigenfunction,
            BarrierBase::DistanceTorsion { profile, .. } => profile,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierSpec {
    pub family: BarrierFamily,
    /// Scaling constant, `c > 0`; the paired barriers share it.
    pub c: f64,
    pub side: Side,
    pub base: Arc<BarrierBase>,
}

/// Right-hand side a barrier is checked against.
#[derive(Debug, Clone, Copy)]
pub enum Rhs<'a> {
    /// Fixed source `θ`.
    Fixed(&'a GridFunction),
    /// `K v^{-p}` evaluated at the candidate `v` itself.
    Singular { weight: &'a GridFunction, p: f64 },
}

/// `A = 1 + diam(Ω)`, raised to `e^{s+1}` when `log A <= s` would make the
/// log profile fail to be superharmonic at its maximum.
pub fn default_log_scale(domain: Domain, s: f64) -> f64 {
    let a = 1.0 + domain.diameter();
    if a.ln() > s {
        a
    } else {
        (s + 1.0).exp()
    }
}

/// Unscaled profile `b^γ` or `b log^s(A/b)` with exact zeros on Dirichlet nodes.
pub fn profile(family: BarrierFamily, base: &BarrierBase) -> Result<GridFunction> {
    let b = base.profile();
    let grid = b.grid().clone();
    let top = b.sup_norm();
    let values = match family {
        BarrierFamily::Power { exponent } => {
            if !(exponent > 0.0 && exponent <= 1.0) {
                return Err(Error::DomainError(format!(
                    "power exponent {exponent} outside (0, 1]"
                )));
            }
            b.values().iter().map(|&v| v.max(0.0).powf(exponent)).collect()
        }
        BarrierFamily::LogPower { exponent, scale } => {
            if !(exponent > 0.0) {
                return Err(Error::DomainError(format!("log exponent {exponent} must be positive")));
            }
            if !(scale > top) {
                return Err(Error::DomainError(format!(
                    "A = {scale} does not exceed max profile value {top}"
                )));
            }
            b.values()
                .iter()
                .map(|&v| if v > 0.0 { v * (scale / v).ln().powf(exponent) } else { 0.0 })
                .collect()
        }
    };
    let mut out = GridFunction::new(grid, values)?;
    out.enforce_dirichlet();
    Ok(out)
}

/// Sample the barrier described by `spec` on `grid`.
pub fn build_barrier(spec: &BarrierSpec, grid: &Arc<Grid1D>) -> Result<GridFunction> {
    same_grid(grid, spec.base.profile().grid())?;
    if !(spec.c > 0.0) {
        return Err(Error::DomainError(format!("scale c = {} must be positive", spec.c)));
    }
    let factor = match spec.side {
        Side::Sub => 1.0 / spec.c,
        Side::Super => spec.c,
    };
    Ok(profile(spec.family, &spec.base)?.map(|v| factor * v))
}

/// Outcome of checking a barrier inequality at the interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub side: Side,
    pub certified: bool,
    /// Node with the least favourable margin.
    pub worst_node: usize,
    /// Relative margin `(-Δₘv)/rhs - 1` at `worst_node`: the largest margin
    /// for `Sub`, the smallest for `Super`.
    pub worst_margin: f64,
    pub checked_nodes: usize,
    pub slack: f64,
}

fn checked_range(grid: &Grid1D) -> std::ops::Range<usize> {
    let n = grid.len();
    let end = n.saturating_sub(1 + BOUNDARY_SKIP);
    match grid.domain() {
        Domain::Interval01 => (1 + BOUNDARY_SKIP)..end,
        Domain::RadialBall { .. } => 0..end,
    }
}

/// Certify `candidate` as a sub- or supersolution of `-Δₘv = rhs`.
///
/// The test is relative: with `μ_i = (-Δₘv)_i / rhs_i - 1`, a subsolution
/// needs `μ_i <= slack` and a supersolution `μ_i >= -slack` at every node at
/// least `BOUNDARY_SKIP + 1` cells from the boundary.
pub fn check_barrier(
    candidate: &GridFunction,
    side: Side,
    rhs: Rhs<'_>,
    m: f64,
    slack: f64,
) -> Result<Certificate> {
    let grid = candidate.grid();
    let range = checked_range(grid);
    if let Rhs::Singular { weight, .. } = rhs {
        same_grid(grid, weight.grid())?;
        for i in grid.free_range() {
            let v = candidate.values()[i];
            if !(v > 0.0) {
                return Err(Error::NonPositiveCandidate { node: i, value: v });
            }
        }
    }
    if let Rhs::Fixed(theta) = rhs {
        same_grid(grid, theta.grid())?;
    }
    let lap = apply_mlap(candidate, m, 0.0)?;
    let mut worst_node = range.start;
    let mut worst = match side {
        Side::Sub => f64::NEG_INFINITY,
        Side::Super => f64::INFINITY,
    };
    for i in range.clone() {
        let target = match rhs {
            Rhs::Fixed(theta) => theta.values()[i],
            Rhs::Singular { weight, p } => weight.values()[i] * candidate.values()[i].powf(-p),
        };
        if !(target > 0.0) || !target.is_finite() {
            return Err(Error::DomainError(format!(
                "right-hand side {target} is not positive and finite at node {i}"
            )));
        }
        let margin = lap.values()[i] / target - 1.0;
        let worse = match side {
            Side::Sub => margin > worst,
            Side::Super => margin < worst,
        };
        if worse {
            worst = margin;
            worst_node = i;
        }
    }
    let certified = match side {
        Side::Sub => worst <= slack,
        Side::Super => worst >= -slack,
    };
    Ok(Certificate {
        side,
        certified,
        worst_node,
        worst_margin: worst,
        checked_nodes: range.len(),
        slack,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleResult {
    pub c: f64,
    pub barrier: GridFunction,
    pub certificate: Certificate,
}

/// Smallest `c = 2^k`, `1 <= k`, `c <= c_max`, for which the barrier certifies.
pub fn auto_scale(
    family: BarrierFamily,
    base: &Arc<BarrierBase>,
    side: Side,
    rhs: Rhs<'_>,
    m: f64,
    c_max: f64,
    slack: f64,
) -> Result<ScaleResult> {
    let grid = base.profile().grid().clone();
    let mut c = 2.0;
    let mut best = f64::NAN;
    while c <= c_max {
        let spec = BarrierSpec {
            family,
            c,
            side,
            base: base.clone(),
        };
        let barrier = build_barrier(&spec, &grid)?;
        let certificate = check_barrier(&barrier, side, rhs, m, slack)?;
        if certificate.certified {
            return Ok(ScaleResult {
                c,
                barrier,
                certificate,
            });
        }
        best = certificate.worst_margin;
        c *= 2.0;
    }
    Err(Error::NoCertifiableScale {
        c_max,
        best_margin: best,
    })
}

/// First eigenpair on `grid` for use as a barrier base.
pub fn eigen_base(grid: Arc<Grid1D>, m: f64, cfg: &SolverConfig) -> Result<Arc<BarrierBase>> {
    let start = default_start(grid);
    let pair = first_eigenpair_from(&start, m, BASE_EIGEN_TOL, cfg)?;
    Ok(Arc::new(BarrierBase::Eigen(pair)))
}

/// Solution of `-Δₘζ = δ^{-a}` normalized to sup-norm one.
pub fn distance_torsion(grid: Arc<Grid1D>, a: f64, m: f64, cfg: &SolverConfig) -> Result<Arc<BarrierBase>> {
    let theta = GridFunction::sample_with_delta(grid, |_, d| d.powf(-a));
    let sol = solve_dirichlet(&theta, m, cfg)?.solution;
    let top = sol.sup_norm();
    let profile = sol.map(|v| v / top);
    Ok(Arc::new(BarrierBase::DistanceTorsion { a, m, profile }))
}

/// Barrier family and base matching the regime of `spec`:
/// `ϕ^{(m-q)/(m+p-1)}` (supercritical), `ϕ log^{1/(m+p-1)}(A/ϕ)` (critical),
/// and the distance torsion `ζ` with `-Δₘζ = δ^{-(p+q)}` (subcritical).
pub fn regime_barrier(
    spec: &ProblemSpec,
    grid: Arc<Grid1D>,
    cfg: &SolverConfig,
) -> Result<(BarrierFamily, Arc<BarrierBase>)> {
    let report = classify_regime(spec)?;
    Ok(match report.regime {
        Regime::Supercritical => (
            BarrierFamily::Power {
                exponent: report.boundary_exponent,
            },
            eigen_base(grid, spec.m, cfg)?,
        ),
        Regime::Critical => {
            let s = report.log_exponent.expect("critical regime carries a log exponent");
            (
                BarrierFamily::LogPower {
                    exponent: s,
                    scale: default_log_scale(spec.domain, s),
                },
                eigen_base(grid, spec.m, cfg)?,
            )
        }
        Regime::Subcritical => (
            BarrierFamily::Power { exponent: 1.0 },
            distance_torsion(grid, spec.p + spec.q, spec.m, cfg)?,
        ),
    })
}

/// Certified pair `lower <= upper` of barriers for a singular problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Bracket {
    pub family: BarrierFamily,
    pub lower: GridFunction,
    pub upper: GridFunction,
    pub lower_scale: f64,
    pub upper_scale: f64,
    pub lower_certificate: Certificate,
    pub upper_certificate: Certificate,
}

/// Auto-scaled sub- and supersolution of `-Δₘu = K u^{-p}` from the
/// regime's barrier family.
pub fn regime_bracket(
    spec: &ProblemSpec,
    weight: &GridFunction,
    cfg: &SolverConfig,
    c_max: f64,
) -> Result<Bracket> {
    let (family, base) = regime_barrier(spec, weight.grid().clone(), cfg)?;
    let rhs = Rhs::Singular { weight, p: spec.p };
    let lower = auto_scale(family, &base, Side::Sub, rhs, spec.m, c_max, DEFAULT_SLACK)?;
    let upper = auto_scale(family, &base, Side::Super, rhs, spec.m, c_max, DEFAULT_SLACK)?;
    Ok(Bracket {
        family,
        lower: lower.barrier,
        upper: upper.barrier,
        lower_scale: lower.c,
        upper_scale: upper.c,
        lower_certificate: lower.certificate,
        upper_certificate: upper.certificate,
    })
}
