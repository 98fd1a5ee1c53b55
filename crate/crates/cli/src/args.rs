//! Command-line flags. Every configuration key has a `--kebab-case` flag and
//! an `MLAP_UPPER_CASE` environment variable.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;

macro_rules! overrides {
    ($($field:ident => $env:literal),* $(,)?) => {
        /// Per-key overrides; flags take precedence over environment variables.
        #[derive(Debug, Clone, Default, Args)]
        pub struct Overrides {
            $(
                #[arg(long, env = $env, value_name = "VALUE", hide_env_values = true)]
                pub $field: Option<String>,
            )*
        }

        impl Overrides {
            /// `(key, value)` for every override that is set.
            pub fn pairs(&self) -> Vec<(&'static str, &str)> {
                let mut out = Vec::new();
                $(
                    if let Some(v) = &self.$field {
                        out.push((stringify!($field), v.as_str()));
                    }
                )*
                out
            }
        }
    };
}

overrides! {
    m => "MLAP_M",
    p => "MLAP_P",
    q => "MLAP_Q",
    k_low => "MLAP_K_LOW",
    k_high => "MLAP_K_HIGH",
    domain => "MLAP_DOMAIN",
    n => "MLAP_N",
    grading => "MLAP_GRADING",
    newton_tol => "MLAP_NEWTON_TOL",
    max_newton_iters => "MLAP_MAX_NEWTON_ITERS",
    eps_schedule => "MLAP_EPS_SCHEDULE",
    damping => "MLAP_DAMPING",
    picard_tol => "MLAP_PICARD_TOL",
    max_picard_iters => "MLAP_MAX_PICARD_ITERS",
    window => "MLAP_WINDOW",
    taus => "MLAP_TAUS",
    levels => "MLAP_LEVELS",
    out_dir => "MLAP_OUT_DIR",
    formats => "MLAP_FORMATS",
    source => "MLAP_SOURCE",
    a => "MLAP_A",
    barrier_exponent => "MLAP_BARRIER_EXPONENT",
    c_max => "MLAP_C_MAX",
    fit => "MLAP_FIT",
    eigen_tol => "MLAP_EIGEN_TOL",
    matrix => "MLAP_MATRIX",
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Flat `key = value` configuration file.
    #[arg(long, env = "MLAP_CONFIG", value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub overrides: Overrides,
}

impl CommonArgs {
    /// Defaults, then the file, then environment variables and flags.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        for (key, value) in self.overrides.pairs() {
            cfg.set(key, value)?;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Parser)]
#[command(name = "mlap", version, about = "Singular quasilinear Dirichlet problems on 1D and radial grids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regime, boundary exponent and Sobolev range of a spec.
    Classify(CommonArgs),
    /// Solve and dump `x,delta,u,du`.
    Solve(CommonArgs),
    /// First eigenpair of the m-Laplacian.
    Eigen(CommonArgs),
    /// Auto-scale and certify the sub- and supersolution barriers.
    BarrierCheck(CommonArgs),
    /// Fit the boundary exponent of a solution.
    FitExponent(CommonArgs),
    /// Gradient integrability across grid refinements.
    ScanThreshold(CommonArgs),
    /// Finiteness of the integral of `δ^{-a}`.
    LemmaIntegral(CommonArgs),
    /// Run every claim for each spec of the test matrix.
    #[command(name = "reproduce-theorem1")]
    ReproduceTheorem1(CommonArgs),
}

impl Command {
    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Classify(a)
            | Command::Solve(a)
            | Command::Eigen(a)
            | Command::BarrierCheck(a)
            | Command::FitExponent(a)
            | Command::ScanThreshold(a)
            | Command::LemmaIntegral(a)
            | Command::ReproduceTheorem1(a) => a,
        }
    }
}
