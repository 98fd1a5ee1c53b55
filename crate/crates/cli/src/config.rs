//! Run configuration.
//!
//! A configuration file holds flat `key = value` lines; `#` starts a comment.
//! Every key can also be set through an `MLAP_<KEY>` environment variable or
//! a `--<key>` flag (underscores become dashes). Flags beat environment
//! variables, which beat the file, which beats the defaults.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mlap_core::{validate_spec, Domain, ProblemSpec, SolverConfig, DEFAULT_GRADING};

use crate::error::CliError;

pub const ENV_PREFIX: &str = "MLAP_";

/// Every key accepted in a configuration file.
pub const KEYS: &[&str] = &[
    "m",
    "p",
    "q",
    "k_low",
    "k_high",
    "domain",
    "n",
    "grading",
    "newton_tol",
    "max_newton_iters",
    "eps_schedule",
    "damping",
    "picard_tol",
    "max_picard_iters",
    "window",
    "taus",
    "levels",
    "out_dir",
    "formats",
    "source",
    "a",
    "barrier_exponent",
    "c_max",
    "fit",
    "eigen_tol",
    "matrix",
];

/// Field solved for by `solve`, `fit-exponent` and `scan-threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    /// `-Δₘu = K u^{-p}`
    Singular,
    /// `-Δₘu = 1`
    Torsion,
    /// `-Δₘu = δ^{-a}`
    DistancePower,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Singular => "singular",
            Source::Torsion => "torsion",
            Source::DistancePower => "distance-power",
        })
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "singular" => Ok(Source::Singular),
            "torsion" => Ok(Source::Torsion),
            "distance-power" => Ok(Source::DistancePower),
            _ => Err(format!("unknown source {s:?} (singular, torsion, distance-power)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMode {
    /// Power fit, switching to the log-corrected fit when the slope drifts.
    Auto,
    Power,
    Log,
}

impl fmt::Display for FitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitMode::Auto => "auto",
            FitMode::Power => "power",
            FitMode::Log => "log",
        })
    }
}

impl FromStr for FitMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(FitMode::Auto),
            "power" => Ok(FitMode::Power),
            "log" => Ok(FitMode::Log),
            _ => Err(format!("unknown fit mode {s:?} (auto, power, log)")),
        }
    }
}

/// One spec of the reproduction matrix, `m:p:q` with an optional
/// `:exponent` overriding the predicted boundary (or log) exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixEntry {
    pub m: f64,
    pub p: f64,
    pub q: f64,
    pub exponent: Option<f64>,
}

impl MatrixEntry {
    pub const fn new(m: f64, p: f64, q: f64) -> Self {
        Self { m, p, q, exponent: None }
    }
}

impl fmt::Display for MatrixEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.m, self.p, self.q)?;
        if let Some(g) = self.exponent {
            write!(f, ":{g}")?;
        }
        Ok(())
    }
}

impl FromStr for MatrixEntry {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(format!("matrix entry {s:?} is not m:p:q[:exponent]"));
        }
        let num = |t: &str| parse_f64(t).map_err(|e| format!("matrix entry {s:?}: {e}"));
        Ok(MatrixEntry {
            m: num(parts[0])?,
            p: num(parts[1])?,
            q: num(parts[2])?,
            exponent: parts.get(3).map(|t| num(t)).transpose()?,
        })
    }
}

/// The three regime test specs.
pub const DEFAULT_MATRIX: [MatrixEntry; 3] = [
    MatrixEntry::new(2.0, 0.3, 0.3),
    MatrixEntry::new(2.0, 0.5, 0.5),
    MatrixEntry::new(2.0, 0.5, 1.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub report: bool,
}

impl fmt::Display for Formats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = [(self.csv, "csv"), (self.report, "report")]
            .into_iter()
            .filter_map(|(on, name)| on.then_some(name))
            .collect();
        f.write_str(&names.join(","))
    }
}

impl FromStr for Formats {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut out = Formats { csv: false, report: false };
        for name in list_items(s) {
            match name {
                "csv" => out.csv = true,
                "report" => out.report = true,
                _ => return Err(format!("unknown output format {name:?} (csv, report)")),
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub m: f64,
    pub p: f64,
    pub q: f64,
    pub k_low: f64,
    pub k_high: f64,
    pub domain: Domain,
    pub n: usize,
    pub grading: f64,
    pub solver: SolverConfig,
    /// Fit window in `δ`; `None` picks one from the regime.
    pub window: Option<(f64, f64)>,
    /// Exponents to scan; empty picks them from the predicted threshold.
    pub taus: Vec<f64>,
    /// Node counts of the refinement levels.
    pub levels: Vec<usize>,
    pub out_dir: PathBuf,
    pub formats: Formats,
    pub source: Source,
    /// Exponent of the `δ^{-a}` source and of the distance integral.
    pub a: f64,
    /// Power barrier exponent; `None` uses the regime's own barrier.
    pub barrier_exponent: Option<f64>,
    pub c_max: f64,
    pub fit: FitMode,
    pub eigen_tol: f64,
    pub matrix: Vec<MatrixEntry>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            m: 2.0,
            p: 0.5,
            q: 1.0,
            k_low: 1.0,
            k_high: 1.0,
            domain: Domain::Interval01,
            n: 4097,
            grading: DEFAULT_GRADING,
            solver: SolverConfig::default(),
            window: None,
            taus: Vec::new(),
            levels: vec![1025, 2049, 4097, 8193],
            out_dir: PathBuf::from("mlap-out"),
            formats: Formats { csv: true, report: true },
            source: Source::Singular,
            a: 4.0 / 3.0,
            barrier_exponent: None,
            c_max: mlap_core::solver::DEFAULT_C_MAX,
            fit: FitMode::Auto,
            eigen_tol: 1e-10,
            matrix: DEFAULT_MATRIX.to_vec(),
        }
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("{s:?} is not a number"))
}

fn parse_usize(s: &str) -> Result<usize, String> {
    s.trim().parse::<usize>().map_err(|_| format!("{s:?} is not a non-negative integer"))
}

fn list_items(s: &str) -> impl Iterator<Item = &str> {
    s.split([',', ';']).map(str::trim).filter(|t| !t.is_empty())
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    list_items(s).map(item).collect()
}

fn is_auto(s: &str) -> bool {
    matches!(s.trim(), "" | "auto")
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Set one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let v = value.trim();
        let wrap = |e: String| CliError::config(format!("{key}: {e}"));
        match key {
            "m" => self.m = parse_f64(v).map_err(wrap)?,
            "p" => self.p = parse_f64(v).map_err(wrap)?,
            "q" => self.q = parse_f64(v).map_err(wrap)?,
            "k_low" => self.k_low = parse_f64(v).map_err(wrap)?,
            "k_high" => self.k_high = parse_f64(v).map_err(wrap)?,
            "domain" => self.domain = v.parse().map_err(|e: mlap_core::Error| wrap(e.to_string()))?,
            "n" => self.n = parse_usize(v).map_err(wrap)?,
            "grading" => self.grading = parse_f64(v).map_err(wrap)?,
            "newton_tol" => self.solver.newton_tol = parse_f64(v).map_err(wrap)?,
            "max_newton_iters" => self.solver.max_newton_iters = parse_usize(v).map_err(wrap)?,
            "eps_schedule" => self.solver.eps_schedule = parse_list(v, parse_f64).map_err(wrap)?,
            "damping" => self.solver.damping = parse_f64(v).map_err(wrap)?,
            "picard_tol" => self.solver.picard_tol = parse_f64(v).map_err(wrap)?,
            "max_picard_iters" => self.solver.max_picard_iters = parse_usize(v).map_err(wrap)?,
            "window" => {
                self.window = if is_auto(v) {
                    None
                } else {
                    let w = parse_list(v, parse_f64).map_err(wrap)?;
                    if w.len() != 2 {
                        return Err(wrap(format!("{v:?} is not lo,hi")));
                    }
                    Some((w[0], w[1]))
                }
            }
            "taus" => {
                self.taus = if is_auto(v) {
                    Vec::new()
                } else {
                    parse_list(v, parse_f64).map_err(wrap)?
                }
            }
            "levels" => self.levels = parse_list(v, parse_usize).map_err(wrap)?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            "formats" => self.formats = v.parse().map_err(wrap)?,
            "source" => self.source = v.parse().map_err(wrap)?,
            "a" => self.a = parse_f64(v).map_err(wrap)?,
            "barrier_exponent" => {
                self.barrier_exponent = if is_auto(v) {
                    None
                } else {
                    Some(parse_f64(v).map_err(wrap)?)
                }
            }
            "c_max" => self.c_max = parse_f64(v).map_err(wrap)?,
            "fit" => self.fit = v.parse().map_err(wrap)?,
            "eigen_tol" => self.eigen_tol = parse_f64(v).map_err(wrap)?,
            "matrix" => self.matrix = parse_list(v, |t| t.parse()).map_err(wrap)?,
            _ => return Err(CliError::config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Apply the lines of a configuration file.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), CliError> {
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::config(format!(
                    "{origin}:{}: expected key = value, got {line:?}",
                    k + 1
                )));
            };
            self.set(key.trim(), value).map_err(|e| match e {
                CliError::Config(msg) => CliError::config(format!("{origin}:{}: {msg}", k + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    /// Defaults overlaid with the file at `path`.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::default();
        cfg.apply_text(&text, &path.display().to_string())?;
        Ok(cfg)
    }

    /// The validated problem spec.
    pub fn spec(&self) -> Result<ProblemSpec, CliError> {
        let spec = ProblemSpec::new(self.m, self.p, self.q)
            .with_envelope(self.k_low, self.k_high)
            .with_domain(self.domain);
        Ok(validate_spec(spec)?)
    }

    /// Checks shared by every command that solves on a grid.
    pub fn validate_numerics(&self) -> Result<(), CliError> {
        self.solver.validate()?;
        if !(self.grading >= 1.0) {
            return Err(mlap_core::Error::InvalidGrading(self.grading).into());
        }
        if let Some((lo, hi)) = self.window {
            if !(lo > 0.0 && lo < hi) {
                return Err(mlap_core::Error::InvalidWindow {
                    lo,
                    hi,
                    reason: "need 0 < lo < hi".into(),
                }
                .into());
            }
        }
        if !(self.c_max >= 2.0) {
            return Err(CliError::config(format!("c_max {} below the smallest scale 2", self.c_max)));
        }
        if !(self.eigen_tol > 0.0) {
            return Err(CliError::config(format!("eigen_tol {} must be positive", self.eigen_tol)));
        }
        Ok(())
    }
}

/// Prints a configuration file that parses back to the same value.
impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.solver;
        writeln!(f, "m = {}", self.m)?;
        writeln!(f, "p = {}", self.p)?;
        writeln!(f, "q = {}", self.q)?;
        writeln!(f, "k_low = {}", self.k_low)?;
        writeln!(f, "k_high = {}", self.k_high)?;
        writeln!(f, "domain = {}", self.domain)?;
        writeln!(f, "n = {}", self.n)?;
        writeln!(f, "grading = {}", self.grading)?;
        writeln!(f, "newton_tol = {}", s.newton_tol)?;
        writeln!(f, "max_newton_iters = {}", s.max_newton_iters)?;
        writeln!(f, "eps_schedule = {}", join(&s.eps_schedule))?;
        writeln!(f, "damping = {}", s.damping)?;
        writeln!(f, "picard_tol = {}", s.picard_tol)?;
        writeln!(f, "max_picard_iters = {}", s.max_picard_iters)?;
        match self.window {
            Some((lo, hi)) => writeln!(f, "window = {lo},{hi}")?,
            None => writeln!(f, "window = auto")?,
        }
        if self.taus.is_empty() {
            writeln!(f, "taus = auto")?;
        } else {
            writeln!(f, "taus = {}", join(&self.taus))?;
        }
        writeln!(f, "levels = {}", join(&self.levels))?;
        writeln!(f, "out_dir = {}", self.out_dir.display())?;
        writeln!(f, "formats = {}", self.formats)?;
        writeln!(f, "source = {}", self.source)?;
        writeln!(f, "a = {}", self.a)?;
        match self.barrier_exponent {
            Some(g) => writeln!(f, "barrier_exponent = {g}")?,
            None => writeln!(f, "barrier_exponent = auto")?,
        }
        writeln!(f, "c_max = {}", self.c_max)?;
        writeln!(f, "fit = {}", self.fit)?;
        writeln!(f, "eigen_tol = {}", self.eigen_tol)?;
        writeln!(f, "matrix = {}", join(&self.matrix))
    }
}
