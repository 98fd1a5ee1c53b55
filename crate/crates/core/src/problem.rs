//! Problem data for `-Δₘu = K(x)u^{-p}` with `u = 0` on the boundary, and the
//! closed-form regime classification of its solution.

use crate::error::{Admissibility, Error, Result};

/// Tolerance on `|p + q - 1|` below which a spec is treated as critical.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;

/// The one-dimensional domains the toolkit works on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// The open unit interval, `δ(x) = min(x, 1 - x)`.
    Interval01,
    /// Radial reduction on the unit ball of `R^dim`, `δ(r) = 1 - r`.
    RadialBall { dim: usize },
}

impl Domain {
    /// Distance to the boundary.
    #[inline]
    pub fn delta(&self, x: f64) -> f64 {
        match self {
            Domain::Interval01 => x.min(1.0 - x),
            Domain::RadialBall { .. } => 1.0 - x,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Interval01 => 1.0,
            Domain::RadialBall { .. } => 2.0,
        }
    }

    /// Largest value of `δ` on the domain.
    pub fn max_delta(&self) -> f64 {
        match self {
            Domain::Interval01 => 0.5,
            Domain::RadialBall { .. } => 1.0,
        }
    }

    /// Exponent of the radial volume weight `r^(dim-1)`; zero on the interval.
    pub fn radial_power(&self) -> i32 {
        match self {
            Domain::Interval01 => 0,
            Domain::RadialBall { dim } => *dim as i32 - 1,
        }
    }
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Domain::Interval01 => f.write_str("interval"),
            Domain::RadialBall { dim } => write!(f, "ball{dim}"),
        }
    }
}

impl std::str::FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "interval" || s == "interval01" {
            return Ok(Domain::Interval01);
        }
        if let Some(d) = s.strip_prefix("ball") {
            let dim: usize = d
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad ball dimension in {s:?}")))?;
            if dim < 2 {
                return Err(Error::InvalidConfig(format!(
                    "ball dimension must be >= 2, got {dim}"
                )));
            }
            return Ok(Domain::RadialBall { dim });
        }
        Err(Error::InvalidConfig(format!(
            "unknown domain {s:?} (expected `interval` or `ball<N>`)"
        )))
    }
}

/// Exponents `(m, p, q)`, the envelope `k_low <= K δ^q <= k_high` and the domain.
///
/// The weight is realized as `K(x) = κ(x) δ(x)^{-q}` where `κ` is constant when
/// `k_low == k_high` and otherwise a smooth oscillation filling the envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub m: f64,
    pub p: f64,
    pub q: f64,
    pub k_low: f64,
    pub k_high: f64,
    pub domain: Domain,
}

impl ProblemSpec {
    /// Spec on the unit interval with `K = δ^{-q}`.
    pub fn new(m: f64, p: f64, q: f64) -> Self {
        Self {
            m,
            p,
            q,
            k_low: 1.0,
            k_high: 1.0,
            domain: Domain::Interval01,
        }
    }

    pub fn with_envelope(mut self, k_low: f64, k_high: f64) -> Self {
        self.k_low = k_low;
        self.k_high = k_high;
        self
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    /// `K(x) δ(x)^q`, always inside `[k_low, k_high]`.
    pub fn kappa(&self, x: f64) -> f64 {
        if self.k_low == self.k_high {
            return self.k_low;
        }
        let mid = 0.5 * (self.k_low + self.k_high);
        let half = 0.5 * (self.k_high - self.k_low);
        mid + half * (6.0 * std::f64::consts::PI * x).cos()
    }

    /// The weight `K(x)`; infinite on the boundary when `q > 0`.
    pub fn weight(&self, x: f64) -> f64 {
        let d = self.domain.delta(x);
        self.kappa(x) * d.powf(-self.q)
    }

    /// `p + q`
    pub fn combined_exponent(&self) -> f64 {
        self.p + self.q
    }
}

/// Check every admissibility constraint; returns the spec unchanged on success.
pub fn validate_spec(spec: ProblemSpec) -> Result<ProblemSpec> {
    let ProblemSpec { m, p, q, .. } = spec;
    let fail = |which, detail: String| Err(Error::AdmissibilityViolation { which, detail });
    if !(m > 1.0) || !m.is_finite() {
        return fail(Admissibility::OperatorExponent, format!("m = {m}"));
    }
    if !(p >= 0.0) || !p.is_finite() {
        return fail(Admissibility::SingularityExponent, format!("p = {p}"));
    }
    if !(q >= 0.0) || !q.is_finite() {
        return fail(Admissibility::WeightExponent, format!("q = {q}"));
    }
    let bound = 2.0 - (1.0 - p) / m;
    if !(p + q < bound) {
        return fail(
            Admissibility::Growth,
            format!("p + q = {} but 2 - (1 - p)/m = {bound}", p + q),
        );
    }
    if !(spec.k_low > 0.0) || !(spec.k_low <= spec.k_high) || !spec.k_high.is_finite() {
        return Err(Error::NonPositiveK {
            k_low: spec.k_low,
            k_high: spec.k_high,
        });
    }
    if let Domain::RadialBall { dim } = spec.domain {
        if dim < 2 {
            return Err(Error::InvalidConfig(format!(
                "ball dimension must be >= 2, got {dim}"
            )));
        }
    }
    Ok(spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    /// `p + q < 1`
    Subcritical,
    /// `p + q = 1`
    Critical,
    /// `p + q > 1`
    Supercritical,
}

impl Regime {
    /// Roman-numeral case label used in claim ids.
    pub fn label(&self) -> &'static str {
        match self {
            Regime::Subcritical => "i",
            Regime::Critical => "ii",
            Regime::Supercritical => "iii",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::Subcritical => "Subcritical",
            Regime::Critical => "Critical",
            Regime::Supercritical => "Supercritical",
        };
        f.write_str(s)
    }
}

/// Holder class the solution is known to belong to. The exponents exist but
/// are not quantified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HolderClass {
    /// `C^{1,α}` up to the boundary.
    C1Alpha,
    /// `C^{0,β}` up to the boundary.
    C0Beta,
}

/// Predicted boundary behavior and Sobolev range for a validated spec.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    /// `γ` with `u ~ δ^γ`.
    pub boundary_exponent: f64,
    /// `s` with `u ~ δ log^s(1/δ)`; only in the critical regime.
    pub log_exponent: Option<f64>,
    /// Supremum of admissible `τ` for `u ∈ W₀^{1,τ}`; infinite unless supercritical.
    pub tau_sup: f64,
    /// `a` with `K u^{-p} ~ δ^{-a}`. In the critical regime this holds the
    /// logarithmic exponent `p/(m+p-1)` of `K u^{-p} ~ δ^{-1} log^{-p/(m+p-1)}(1/δ)`.
    pub theta_exponent: f64,
    pub holder: HolderClass,
    /// Lower end `m` of the Sobolev range.
    pub tau_min: f64,
}

/// Closed-form regime classification. Validates the spec first.
pub fn classify_regime(spec: &ProblemSpec) -> Result<RegimeReport> {
    let spec = validate_spec(*spec)?;
    let ProblemSpec { m, p, q, .. } = spec;
    let excess = p + q - 1.0;
    let denom = m + p - 1.0;
    let report = if excess.abs() <= CRITICAL_TOLERANCE {
        RegimeReport {
            regime: Regime::Critical,
            boundary_exponent: 1.0,
            log_exponent: Some(1.0 / denom),
            tau_sup: f64::INFINITY,
            theta_exponent: p / denom,
            holder: HolderClass::C0Beta,
            tau_min: m,
        }
    } else if excess < 0.0 {
        RegimeReport {
            regime: Regime::Subcritical,
            boundary_exponent: 1.0,
            log_exponent: None,
            tau_sup: f64::INFINITY,
            theta_exponent: p + q,
            holder: HolderClass::C1Alpha,
            tau_min: m,
        }
    } else {
        RegimeReport {
            regime: Regime::Supercritical,
            boundary_exponent: (m - q) / denom,
            log_exponent: None,
            tau_sup: denom / excess,
            theta_exponent: (m * p + (m - 1.0) * q) / denom,
            holder: HolderClass::C0Beta,
            tau_min: m,
        }
    };
    Ok(report)
}
