use thiserror::Error;

use crate::solver::SolveReport;

/// Which admissibility inequality a [`ProblemSpec`](crate::ProblemSpec) violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admissibility {
    /// `m > 1`
    OperatorExponent,
    /// `p >= 0`
    SingularityExponent,
    /// `q >= 0`
    WeightExponent,
    /// `p + q < 2 - (1 - p)/m`
    Growth,
}

impl std::fmt::Display for Admissibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::OperatorExponent => "m > 1",
            Self::SingularityExponent => "p >= 0",
            Self::WeightExponent => "q >= 0",
            Self::Growth => "p + q < 2 - (1 - p)/m",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("admissibility violation: {which} fails ({detail})")]
    AdmissibilityViolation { which: Admissibility, detail: String },

    #[error("K envelope must satisfy 0 < k_low <= k_high, got k_low = {k_low}, k_high = {k_high}")]
    NonPositiveK { k_low: f64, k_high: f64 },

    #[error("invalid grading exponent {0} (must be >= 1)")]
    InvalidGrading(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e}): {context}")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        context: String,
        /// State reached when the budget ran out, when there is one.
        partial: Option<Box<SolveReport>>,
    },

    #[error("Jacobian lost positive definiteness at node {node} (pivot {pivot:.3e})")]
    IndefiniteJacobian { node: usize, pivot: f64 },

    #[error("iterate escaped the barrier bracket at node {node} by {excess:.3e}")]
    BarrierOrderViolation { node: usize, excess: f64 },

    #[error("eigen iterate changed sign at node {node}")]
    SignChange { node: usize },

    #[error("barrier domain error: {0}")]
    DomainError(String),

    #[error("candidate is not positive at interior node {node} (value {value:.3e})")]
    NonPositiveCandidate { node: usize, value: f64 },

    #[error("no certifying scale up to c_max = {c_max} (best margin {best_margin:.3e})")]
    NoCertifiableScale { c_max: f64, best_margin: f64 },

    #[error("fit window holds {found} nodes, need at least {needed}")]
    InsufficientWindow { found: usize, needed: usize },

    #[error("invalid fit window ({lo:.3e}, {hi:.3e}): {reason}")]
    InvalidWindow { lo: f64, hi: f64, reason: String },

    #[error("field is not positive at node {node} inside the fit window")]
    NonPositiveValues { node: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("solve failed at refinement level n = {n}: {source}")]
    SolveFailed {
        n: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
