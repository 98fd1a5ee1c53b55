//! End-to-end check of the boundary behavior and integrability claims for
//! each spec of a test matrix.

use std::sync::Arc;
use std::thread;

use mlap_core::analyzer::gradient_bound_check;
use mlap_core::barriers::BOUNDARY_SKIP;
use mlap_core::solver::solve_singular;
use mlap_core::{
    classify_regime, fit_boundary_exponent, fit_log_correction, make_graded_grid, threshold_scan,
    validate_spec, GridFunction, ProblemSpec, Regime, RegimeReport, ScanSource, SolveReport,
    SolverConfig,
};

use crate::commands::{default_taus, default_window, EXPONENT_TOL, LOG_EXPONENT_TOL};
use crate::config::{MatrixEntry, RunConfig};
use crate::error::CliError;
use crate::report::{Claim, ClaimValue, ReproReport};

/// Grid size of the exponent fits; the critical fit needs a deeper window.
const FIT_NODES: usize = 8193;
const CRITICAL_FIT_NODES: usize = 16385;
/// Levels of the integrability scans.
const SCAN_LEVELS: [usize; 4] = [1025, 2049, 4097, 8193];
/// Coarse and fine grids of the gradient stability check.
const GRADIENT_LEVELS: (usize, usize) = (4097, 8193);
const GRADIENT_FACTOR: f64 = 1.5;

struct Entry {
    spec: ProblemSpec,
    regime: RegimeReport,
    override_exponent: Option<f64>,
    tag: String,
}

impl Entry {
    fn id(&self, claim: &str) -> String {
        format!("Thm1.{}.{claim}{}", self.regime.regime.label(), self.tag)
    }
}

/// Run every claim of every matrix entry. Entries run concurrently; a
/// failure inside one claim is recorded and the run continues.
pub fn reproduce(cfg: &RunConfig) -> Result<ReproReport, CliError> {
    if cfg.matrix.is_empty() {
        return Err(mlap_core::Error::InvalidConfig("empty test matrix".into()).into());
    }
    cfg.validate_numerics()?;
    let mut entries = Vec::with_capacity(cfg.matrix.len());
    for e in &cfg.matrix {
        entries.push(entry(cfg, e)?);
    }
    for (k, a) in entries.iter().enumerate() {
        if entries[..k].iter().any(|b| b.tag == a.tag) {
            return Err(CliError::config(format!("matrix lists {} twice", a.tag)));
        }
    }
    let claims: Vec<Claim> = thread::scope(|s| {
        let handles: Vec<_> = entries
            .iter()
            .map(|e| s.spawn(|| entry_claims(e, cfg.grading, &cfg.solver)))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("claim worker panicked"))
            .collect()
    });
    Ok(ReproReport::new(claims))
}

fn entry(cfg: &RunConfig, e: &MatrixEntry) -> Result<Entry, CliError> {
    let spec = validate_spec(
        ProblemSpec::new(e.m, e.p, e.q)
            .with_envelope(cfg.k_low, cfg.k_high)
            .with_domain(cfg.domain),
    )?;
    Ok(Entry {
        spec,
        regime: classify_regime(&spec)?,
        override_exponent: e.exponent,
        tag: format!("[m={},p={},q={}]", e.m, e.p, e.q),
    })
}

fn solve_at(entry: &Entry, n: usize, grading: f64, solver: &SolverConfig) -> mlap_core::Result<SolveReport> {
    let grid = Arc::new(make_graded_grid(n, grading, entry.spec.domain)?);
    solve_singular(&entry.spec, grid, solver)
}

fn entry_claims(entry: &Entry, grading: f64, solver: &SolverConfig) -> Vec<Claim> {
    let fit_nodes = match entry.regime.regime {
        Regime::Critical => CRITICAL_FIT_NODES,
        _ => FIT_NODES,
    };
    let mut claims = Vec::new();
    let solved = solve_at(entry, fit_nodes, grading, solver);
    let converged = ClaimValue::text("converged");
    let sol = match solved {
        Ok(sol) => {
            claims.push(
                Claim::textual(entry.id("solve"), "converged", if sol.converged { "converged" } else { "stalled" })
                    .with_note(format!("n = {fit_nodes}, outer iterations = {}", sol.iterations)),
            );
            claims.push(bracket_claim(entry, &sol, solver.picard_tol));
            Some(sol)
        }
        Err(e) => {
            claims.push(Claim::failed(entry.id("solve"), converged, &e));
            claims.push(Claim::failed(entry.id("bracket"), ClaimValue::number(0.0), "solve failed"));
            None
        }
    };
    let u = sol.as_ref().map(|s| &s.solution);
    let window = default_window(Some(entry.regime.regime));
    match entry.regime.regime {
        Regime::Supercritical => {
            let predicted = entry.override_exponent.unwrap_or(entry.regime.boundary_exponent);
            claims.push(power_claim(entry, u, window, predicted));
            claims.push(scan_claim(entry, "threshold", grading, solver));
        }
        Regime::Critical => {
            let predicted = entry
                .override_exponent
                .or(entry.regime.log_exponent)
                .expect("critical regime carries a log exponent");
            claims.push(log_claim(entry, u, window, predicted));
            claims.push(scan_claim(entry, "integrability", grading, solver));
        }
        Regime::Subcritical => {
            let predicted = entry.override_exponent.unwrap_or(entry.regime.boundary_exponent);
            claims.push(power_claim(entry, u, window, predicted));
            claims.push(gradient_claim(entry, grading, solver));
        }
    }
    claims
}

/// The solution lies between the certified barriers within `picard_tol`.
fn bracket_claim(entry: &Entry, sol: &SolveReport, tol: f64) -> Claim {
    let id = entry.id("bracket");
    let Some(br) = &sol.bracket else {
        return Claim::failed(id, ClaimValue::number(0.0), "solve carried no bracket");
    };
    let u = sol.solution.values();
    let excess = u
        .iter()
        .zip(br.lower.values())
        .zip(br.upper.values())
        .map(|((v, lo), hi)| (lo - v).max(v - hi).max(0.0))
        .fold(0.0, f64::max);
    let certified = br.lower_certificate.certified && br.upper_certificate.certified;
    let mut claim = Claim::numeric(id, 0.0, excess, tol);
    claim.pass &= certified;
    claim.with_note(format!(
        "{} with c_sub = {}, c_super = {}, certified = {certified}",
        br.family, br.lower_scale, br.upper_scale
    ))
}

fn power_claim(entry: &Entry, u: Option<&GridFunction>, window: (f64, f64), predicted: f64) -> Claim {
    let id = entry.id("exponent");
    let Some(u) = u else {
        return Claim::failed(id, ClaimValue::number(predicted), "solve failed");
    };
    match fit_boundary_exponent(u, window) {
        Ok(fit) => Claim::numeric(id, predicted, fit.exponent, EXPONENT_TOL).with_note(format!(
            "window = ({}, {}), nodes = {}, r2 = {}",
            window.0, window.1, fit.nodes_used, fit.r_squared
        )),
        Err(e) => Claim::failed(id, ClaimValue::number(predicted), e),
    }
}

fn log_claim(entry: &Entry, u: Option<&GridFunction>, window: (f64, f64), predicted: f64) -> Claim {
    let id = entry.id("log_exponent");
    let Some(u) = u else {
        return Claim::failed(id, ClaimValue::number(predicted), "solve failed");
    };
    match fit_log_correction(u, window) {
        Ok(fit) => {
            let s = fit.log_exponent.unwrap_or(f64::NAN);
            Claim::numeric(id, predicted, s, LOG_EXPONENT_TOL).with_note(format!(
                "{} fit, window = ({}, {}), nodes = {}",
                if fit.offset.is_some() { "offset" } else { "pure" },
                window.0,
                window.1,
                fit.nodes_used
            ))
        }
        Err(e) => Claim::failed(id, ClaimValue::number(predicted), e),
    }
}

/// Integrability pattern of the gradient across refinements: convergent
/// below the predicted threshold, divergent above it.
fn scan_claim(entry: &Entry, name: &str, grading: f64, solver: &SolverConfig) -> Claim {
    let id = entry.id(name);
    let threshold = entry.regime.tau_sup;
    let taus: Vec<f64> = default_taus(threshold)
        .into_iter()
        .filter(|&t| (t - threshold).abs() > 1e-9 * threshold.min(1e9))
        .collect();
    let expected: Vec<String> = taus
        .iter()
        .map(|&t| if t < threshold { "Convergent" } else { "Divergent" }.to_string())
        .collect();
    let note = format!(
        "tau = {}",
        taus.iter().map(|t| format!("{t:.4}")).collect::<Vec<_>>().join(",")
    );
    let source = ScanSource::Singular(entry.spec);
    match threshold_scan(&source, &taus, &SCAN_LEVELS, grading, solver) {
        Ok(scan) => {
            let measured: Vec<String> = scan.verdicts.iter().map(|v| v.to_string()).collect();
            Claim::textual(id, expected.join(","), measured.join(",")).with_note(note)
        }
        Err(e) => Claim::failed(id, ClaimValue::text(expected.join(",")), e),
    }
}

/// `sup |Du|` away from the boundary agrees across one refinement.
fn gradient_claim(entry: &Entry, grading: f64, solver: &SolverConfig) -> Claim {
    let id = entry.id("gradient_bound");
    let (coarse_n, fine_n) = GRADIENT_LEVELS;
    let coarse = solve_at(entry, coarse_n, grading, solver);
    let fine = solve_at(entry, fine_n, grading, solver);
    match (coarse, fine) {
        (Ok(c), Ok(f)) => {
            let r = gradient_bound_check(&c.solution, &f.solution, 1.0, BOUNDARY_SKIP, GRADIENT_FACTOR);
            let ratio = (r.fine_constant / r.coarse_constant).max(r.coarse_constant / r.fine_constant);
            Claim::numeric(id, 1.0, ratio, GRADIENT_FACTOR - 1.0).with_note(format!(
                "sup |Du| = {} at n = {coarse_n}, {} at n = {fine_n}",
                r.coarse_constant, r.fine_constant
            ))
        }
        (Err(e), _) | (_, Err(e)) => Claim::failed(id, ClaimValue::number(1.0), e),
    }
}

