//! One function per subcommand. Each returns the report printed to stdout
//! and whether its verification passed; files go to the output directory.

use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use mlap_core::analyzer::{
    detect_boundary_behavior, power_source_threshold, BoundaryFit, IntegralVerdict,
};
use mlap_core::barriers::{auto_scale, eigen_base, regime_barrier, Rhs, ScaleResult, DEFAULT_SLACK};
use mlap_core::eigen::{default_start, first_eigenpair_from};
use mlap_core::solver::{sample_weight, solve_singular};
use mlap_core::{
    classify_regime, distance_integral_classify, fit_boundary_exponent, fit_log_correction,
    make_graded_grid, solve_dirichlet, threshold_scan, BarrierFamily, Error, FitResult,
    Grid1D, GridFunction, HolderClass, Regime, ScanSource, Side, SolveReport, Verdict,
};

use crate::config::{FitMode, RunConfig, Source};
use crate::error::CliError;
use crate::field::{write_field_csv, write_scan_csv};
use crate::report::{Block, Report};

/// Tolerance on a fitted power exponent.
pub const EXPONENT_TOL: f64 = 0.03;
/// Tolerance on a fitted log exponent.
pub const LOG_EXPONENT_TOL: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub passed: bool,
}

/// Writes the enabled output formats into the configured directory.
struct Output<'a> {
    cfg: &'a RunConfig,
}

impl Output<'_> {
    fn path(&self, name: &str) -> Result<PathBuf, CliError> {
        let dir = &self.cfg.out_dir;
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.clone(),
            source,
        })?;
        Ok(dir.join(name))
    }

    fn field(&self, name: &str, u: &GridFunction) -> Result<(), CliError> {
        if self.cfg.formats.csv {
            write_field_csv(&self.path(&format!("{name}.csv"))?, u)?;
        }
        Ok(())
    }

    fn report(&self, name: &str, report: &Report) -> Result<(), CliError> {
        if self.cfg.formats.report {
            write_text(&self.path(&format!("{name}.report"))?, &report.to_string())?;
            write_text(&self.path(&format!("{name}.conf"))?, &self.cfg.to_string())?;
        }
        Ok(())
    }
}

fn write_text(path: &PathBuf, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })
}

/// Six significant decimals; whole numbers and infinities print bare.
pub fn short(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else if x.is_finite() && x == x.round() && x.abs() < 1e15 {
        format!("{x}")
    } else {
        format!("{x:.6}")
    }
}

fn grid(cfg: &RunConfig, n: usize) -> Result<Arc<Grid1D>, CliError> {
    Ok(Arc::new(make_graded_grid(n, cfg.grading, cfg.domain)?))
}

fn check_operator_exponent(m: f64) -> Result<(), CliError> {
    if m > 1.0 {
        Ok(())
    } else {
        Err(CliError::config(format!("operator exponent m = {m} must exceed 1")))
    }
}

/// `δ^{-a}` needs `0 <= a < 2 - 1/m` for a finite-energy solution.
fn check_source_exponent(m: f64, a: f64) -> Result<(), CliError> {
    if a >= 0.0 && a < 2.0 - 1.0 / m {
        Ok(())
    } else {
        Err(CliError::config(format!("source exponent a = {a} outside [0, 2 - 1/m)")))
    }
}

/// Solve for the configured source on the configured grid.
fn solve_source(cfg: &RunConfig, n: usize) -> Result<SolveReport, CliError> {
    cfg.validate_numerics()?;
    match cfg.source {
        Source::Singular => {
            let spec = cfg.spec()?;
            Ok(solve_singular(&spec, grid(cfg, n)?, &cfg.solver)?)
        }
        Source::Torsion => {
            check_operator_exponent(cfg.m)?;
            let theta = GridFunction::sample_dirichlet(grid(cfg, n)?, |_| 1.0);
            Ok(solve_dirichlet(&theta, cfg.m, &cfg.solver)?)
        }
        Source::DistancePower => {
            check_operator_exponent(cfg.m)?;
            check_source_exponent(cfg.m, cfg.a)?;
            let a = cfg.a;
            let mut theta = GridFunction::sample_with_delta(grid(cfg, n)?, |_, d| d.powf(-a));
            theta.enforce_dirichlet();
            Ok(solve_dirichlet(&theta, cfg.m, &cfg.solver)?)
        }
    }
}

fn problem_block(cfg: &RunConfig, command: &str) -> Block {
    let mut b = Block::new();
    b.push("command", command)
        .push("m", cfg.m)
        .push("p", cfg.p)
        .push("q", cfg.q)
        .push("domain", cfg.domain);
    b
}

pub fn classify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let r = classify_regime(&cfg.spec()?)?;
    let mut b = problem_block(cfg, "classify");
    b.push("regime", r.regime)
        .push("label", r.regime.label())
        .push("gamma", short(r.boundary_exponent));
    if let Some(s) = r.log_exponent {
        b.push("log_exponent", short(s));
    }
    b.push("tau_star", short(r.tau_sup))
        .push("tau_min", short(r.tau_min))
        .push("source_exponent", short(r.theta_exponent))
        .push(
            "holder",
            match r.holder {
                HolderClass::C1Alpha => "C1,alpha",
                HolderClass::C0Beta => "C0,beta",
            },
        );
    let mut report = Report::new();
    report.push_block(b);
    Ok(Outcome { report, passed: true })
}

pub fn solve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sol = solve_source(cfg, cfg.n)?;
    let u = &sol.solution;
    let (peak_node, peak) = u.argmax();
    let mut b = problem_block(cfg, "solve");
    b.push("source", cfg.source)
        .push("n", cfg.n)
        .push("grading", cfg.grading)
        .push("iterations", sol.iterations)
        .push("final_residual", sol.final_residual)
        .push("converged", sol.converged)
        .push("peak_x", u.grid().nodes()[peak_node])
        .push("peak_u", peak);
    if let Some(br) = &sol.bracket {
        b.push("barrier_family", br.family)
            .push("lower_scale", br.lower_scale)
            .push("upper_scale", br.upper_scale);
    }
    let mut report = Report::new();
    report.push_block(b);
    let out = Output { cfg };
    out.field("solve", u)?;
    out.report("solve", &report)?;
    Ok(Outcome {
        report,
        passed: sol.converged,
    })
}

pub fn eigen(cfg: &RunConfig) -> Result<Outcome, CliError> {
    check_operator_exponent(cfg.m)?;
    cfg.validate_numerics()?;
    let g = grid(cfg, cfg.n)?;
    let pair = first_eigenpair_from(&default_start(g), cfg.m, cfg.eigen_tol, &cfg.solver)?;
    let mut b = Block::new();
    b.push("command", "eigen")
        .push("m", cfg.m)
        .push("domain", cfg.domain)
        .push("n", cfg.n)
        .push("lambda", pair.eigenvalue)
        .push("residual", pair.residual)
        .push("iterations", pair.iterations);
    let mut report = Report::new();
    report.push_block(b);
    let out = Output { cfg };
    out.field("eigen", &pair.eigenfunction)?;
    out.report("eigen", &report)?;
    Ok(Outcome { report, passed: true })
}

fn side_block(side: Side, result: &Result<ScaleResult, Error>) -> Result<(Block, bool), CliError> {
    let mut b = Block::new();
    b.push("side", side);
    let ok = match result {
        Ok(s) => {
            b.push("certified", s.certificate.certified)
                .push("scale", s.c)
                .push("worst_margin", s.certificate.worst_margin)
                .push("worst_node", s.certificate.worst_node)
                .push("checked_nodes", s.certificate.checked_nodes);
            s.certificate.certified
        }
        Err(Error::NoCertifiableScale { c_max, best_margin }) => {
            b.push("certified", false)
                .push("c_max", c_max)
                .push("best_margin", best_margin);
            false
        }
        Err(e) => return Err(e.clone().into()),
    };
    Ok((b, ok))
}

pub fn barrier_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.spec()?;
    cfg.validate_numerics()?;
    let g = grid(cfg, cfg.n)?;
    let (family, base) = match cfg.barrier_exponent {
        Some(exponent) => {
            if !(exponent > 0.0 && exponent <= 1.0) {
                return Err(CliError::config(format!("barrier exponent {exponent} outside (0, 1]")));
            }
            (BarrierFamily::Power { exponent }, eigen_base(g.clone(), spec.m, &cfg.solver)?)
        }
        None => regime_barrier(&spec, g.clone(), &cfg.solver)?,
    };
    let weight = sample_weight(&spec, g);
    let rhs = Rhs::Singular { weight: &weight, p: spec.p };
    let mut head = problem_block(cfg, "barrier-check");
    head.push("n", cfg.n)
        .push("family", family)
        .push("c_max", cfg.c_max)
        .push("slack", DEFAULT_SLACK);
    let mut report = Report::new();
    report.push_block(head);
    let out = Output { cfg };
    let mut passed = true;
    for side in [Side::Sub, Side::Super] {
        let result = auto_scale(family, &base, side, rhs, spec.m, cfg.c_max, DEFAULT_SLACK);
        let (block, ok) = side_block(side, &result)?;
        if let Ok(s) = &result {
            out.field(&format!("barrier-{side}"), &s.barrier)?;
        }
        report.push_block(block);
        passed &= ok;
    }
    out.report("barrier-check", &report)?;
    Ok(Outcome { report, passed })
}

/// Regime-dependent default fit window.
pub fn default_window(regime: Option<Regime>) -> (f64, f64) {
    match regime {
        Some(Regime::Critical) => (1e-5, 1e-2),
        Some(Regime::Subcritical) => (1e-5, 1e-3),
        _ => (1e-4, 1e-2),
    }
}

fn fit_block(b: &mut Block, kind: &str, fit: &FitResult) {
    b.push("kind", kind).push("exponent", fit.exponent);
    if let Some(s) = fit.log_exponent {
        b.push("log_exponent", s);
    }
    b.push("coefficient", fit.coefficient);
    if let Some(d) = fit.offset {
        b.push("offset", d);
    }
    b.push("r_squared", fit.r_squared)
        .push("window_lo", fit.window.0)
        .push("window_hi", fit.window.1)
        .push("nodes_used", fit.nodes_used);
}

pub fn fit_exponent(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let regime = match cfg.source {
        Source::Singular => Some(classify_regime(&cfg.spec()?)?),
        _ => None,
    };
    let window = cfg.window.unwrap_or(default_window(regime.map(|r| r.regime)));
    let sol = solve_source(cfg, cfg.n)?;
    let u = &sol.solution;
    let fit = match cfg.fit {
        FitMode::Power => BoundaryFit::Power(fit_boundary_exponent(u, window)?),
        FitMode::Log => BoundaryFit::LogCorrected(fit_log_correction(u, window)?),
        FitMode::Auto => detect_boundary_behavior(u, window)?,
    };
    let mut b = problem_block(cfg, "fit-exponent");
    b.push("source", cfg.source).push("n", cfg.n);
    let measured = match &fit {
        BoundaryFit::Power(f) => {
            fit_block(&mut b, "power", f);
            (false, f.exponent)
        }
        BoundaryFit::LogCorrected(f) => {
            fit_block(&mut b, "log", f);
            (true, f.log_exponent.unwrap_or(f64::NAN))
        }
    };
    let mut passed = true;
    if let Some(r) = regime {
        let (is_log, value) = measured;
        let (predicted, tol) = match r.log_exponent {
            Some(s) => (s, LOG_EXPONENT_TOL),
            None => (r.boundary_exponent, EXPONENT_TOL),
        };
        passed = is_log == r.log_exponent.is_some() && (value - predicted).abs() <= tol;
        b.push("predicted", predicted)
            .push("tolerance", tol)
            .push("result", if passed { "pass" } else { "fail" });
    }
    let mut report = Report::new();
    report.push_block(b);
    let out = Output { cfg };
    out.field("fit-exponent", u)?;
    out.report("fit-exponent", &report)?;
    Ok(Outcome { report, passed })
}

/// Exponents bracketing a finite threshold, or a spread of values when the
/// threshold is infinite.
pub fn default_taus(threshold: f64) -> Vec<f64> {
    if threshold.is_finite() {
        [2.0 / 3.0, 5.0 / 6.0, 29.0 / 30.0, 1.0, 7.0 / 6.0, 4.0 / 3.0]
            .iter()
            .map(|f| f * threshold)
            .filter(|&t| t >= 1.0)
            .collect()
    } else {
        vec![2.0, 4.0, 8.0]
    }
}

/// Whether a verdict matches the prediction for `tau` against `threshold`.
/// At the threshold itself any non-convergent verdict is accepted.
pub fn verdict_expected(tau: f64, threshold: f64, verdict: Verdict) -> Option<bool> {
    if threshold.is_nan() {
        return None;
    }
    if threshold == f64::INFINITY {
        return Some(verdict == Verdict::Convergent);
    }
    let rel = 1e-9 * threshold.abs().max(1.0);
    Some(if tau < threshold - rel {
        verdict == Verdict::Convergent
    } else if tau > threshold + rel {
        verdict == Verdict::Divergent
    } else {
        verdict != Verdict::Convergent
    })
}

fn scan_source(cfg: &RunConfig) -> Result<(ScanSource, f64), CliError> {
    Ok(match cfg.source {
        Source::Singular => {
            let spec = cfg.spec()?;
            (ScanSource::Singular(spec), classify_regime(&spec)?.tau_sup)
        }
        Source::Torsion => {
            check_operator_exponent(cfg.m)?;
            let src = ScanSource::Dirichlet {
                theta: Arc::new(|_| 1.0),
                m: cfg.m,
                domain: cfg.domain,
            };
            (src, f64::INFINITY)
        }
        Source::DistancePower => {
            check_operator_exponent(cfg.m)?;
            check_source_exponent(cfg.m, cfg.a)?;
            let (a, domain) = (cfg.a, cfg.domain);
            let src = ScanSource::Dirichlet {
                theta: Arc::new(move |x| domain.delta(x).powf(-a)),
                m: cfg.m,
                domain,
            };
            let threshold = if a > 1.0 {
                power_source_threshold(cfg.m, a)
            } else {
                f64::INFINITY
            };
            (src, threshold)
        }
    })
}

pub fn scan_threshold(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate_numerics()?;
    let (source, threshold) = scan_source(cfg)?;
    let taus = if cfg.taus.is_empty() {
        default_taus(threshold)
    } else {
        cfg.taus.clone()
    };
    let scan = threshold_scan(&source, &taus, &cfg.levels, cfg.grading, &cfg.solver)?;
    let mut report = Report::new();
    let mut head = problem_block(cfg, "scan-threshold");
    head.push("source", cfg.source)
        .push("levels", join(&scan.levels))
        .push("predicted_threshold", threshold);
    report.push_block(head);
    let mut passed = true;
    for k in 0..taus.len() {
        let mut b = Block::new();
        b.push("tau", scan.tau_values[k])
            .push("verdict", scan.verdicts[k])
            .push("finest_ratio", scan.finest_ratio[k])
            .push("increment_ratio", scan.increment_ratio[k])
            .push("finest_norm", scan.norms.last().map_or(f64::NAN, |row| row[k]));
        if let Some(ok) = verdict_expected(scan.tau_values[k], threshold, scan.verdicts[k]) {
            b.push("result", if ok { "pass" } else { "fail" });
            passed &= ok;
        }
        report.push_block(b);
    }
    let out = Output { cfg };
    if cfg.formats.csv {
        write_scan_csv(&out.path("scan-threshold.csv")?, &scan)?;
    }
    out.report("scan-threshold", &report)?;
    Ok(Outcome { report, passed })
}

pub fn lemma_integral(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let r = distance_integral_classify(cfg.a, &cfg.levels)?;
    let mut b = Block::new();
    b.push("command", "lemma-integral")
        .push("a", r.a)
        .push("levels", join(&r.levels))
        .push("values", join(&r.values))
        .push("increment_ratio", r.increment_ratio);
    match r.verdict {
        IntegralVerdict::Finite(v) => b.push("verdict", "Finite").push("value", v),
        IntegralVerdict::Infinite => b.push("verdict", "Infinite"),
    };
    let mut report = Report::new();
    report.push_block(b);
    Output { cfg }.report("lemma-integral", &report)?;
    Ok(Outcome { report, passed: true })
}

pub fn reproduce_theorem1(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let repro = crate::repro::reproduce(cfg)?;
    let report = repro.to_report();
    Output { cfg }.report("reproduce-theorem1", &report)?;
    Ok(Outcome {
        passed: repro.overall,
        report,
    })
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_numbers() {
        assert_eq!(short(3.0), "3");
        assert_eq!(short(2.0 / 3.0), "0.666667");
        assert_eq!(short(f64::INFINITY), "inf");
    }

    #[test]
    fn taus_bracket_the_threshold() {
        let t = default_taus(3.0);
        assert_eq!(t.len(), 6);
        assert!(t.contains(&3.0));
        assert_eq!(default_taus(f64::INFINITY), vec![2.0, 4.0, 8.0]);
        // values below 1 are not valid Sobolev exponents
        assert!(default_taus(1.2).iter().all(|&x| x >= 1.0));
    }

    #[test]
    fn expected_verdicts() {
        use Verdict::*;
        assert_eq!(verdict_expected(2.0, 3.0, Convergent), Some(true));
        assert_eq!(verdict_expected(3.0, 3.0, Marginal), Some(true));
        assert_eq!(verdict_expected(3.0, 3.0, Convergent), Some(false));
        assert_eq!(verdict_expected(4.0, 3.0, Marginal), Some(false));
        assert_eq!(verdict_expected(4.0, f64::INFINITY, Convergent), Some(true));
        assert_eq!(verdict_expected(4.0, f64::NAN, Divergent), None);
    }

    #[test]
    fn classify_supercritical() {
        let out = classify(&RunConfig::default()).unwrap();
        assert_eq!(out.report.get("regime"), Some("Supercritical"));
        assert_eq!(out.report.get("gamma"), Some("0.666667"));
        assert_eq!(out.report.get("tau_star"), Some("3"));
    }
}
