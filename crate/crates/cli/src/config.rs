//! Run configuration: defaults, `key = value` file, command-line overrides.

use serde::Deserialize;
use std::fmt;
use std::path::{Path, PathBuf};

/// Upper bound on the perturbation accepted by a run.
pub const MU_BAR: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mu: f64,
    pub omega_i: f64,
    pub omega_f: f64,
    /// Outer tolerance on the gradient norm.
    pub eps: f64,
    pub bvp_tol: f64,
    pub bvp_max_iter: usize,
    pub h_max: f64,
    pub alpha: f64,
    pub max_steps: usize,
    pub n_override: Option<usize>,
    /// Accept an override chain whose spacing exceeds `C mu` or whose
    /// endpoints leave the admissible windows.
    pub acknowledge_override: bool,
    pub trajectory: PathBuf,
    pub report: PathBuf,
    /// Worker threads for segment solves, 0 for all cores.
    pub threads: usize,
    /// Zero the wall-clock fields so that reports are reproducible.
    pub deterministic: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mu: 0.75e-7,
            omega_i: f64::NAN,
            omega_f: f64::NAN,
            eps: 1e-8,
            bvp_tol: 1e-10,
            bvp_max_iter: 200,
            h_max: 0.01,
            alpha: 0.5,
            max_steps: 1000,
            n_override: None,
            acknowledge_override: false,
            trajectory: PathBuf::from("trajectory.txt"),
            report: PathBuf::from("report.toml"),
            threads: 0,
            deterministic: false,
        }
    }
}

/// Every key a configuration file may set.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigPatch {
    pub mu: Option<f64>,
    pub omega_i: Option<f64>,
    pub omega_f: Option<f64>,
    pub eps: Option<f64>,
    pub bvp_tol: Option<f64>,
    pub bvp_max_iter: Option<usize>,
    pub h_max: Option<f64>,
    pub alpha: Option<f64>,
    pub max_steps: Option<usize>,
    pub n_override: Option<usize>,
    pub acknowledge_override: Option<bool>,
    pub trajectory: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub threads: Option<usize>,
    pub deterministic: Option<bool>,
}

macro_rules! take {
    ($dst:expr, $src:expr, $($f:ident),*) => {
        $( if let Some(v) = $src.$f.clone() { $dst.$f = v; } )*
    };
}

impl ConfigPatch {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(format!("config file: {}", e.message())))
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn apply(&self, cfg: &mut RunConfig) {
        take!(cfg, self, mu, omega_i, omega_f, eps, bvp_tol, bvp_max_iter, h_max, alpha, max_steps);
        take!(cfg, self, acknowledge_override, trajectory, report, threads, deterministic);
        if self.n_override.is_some() {
            cfg.n_override = self.n_override;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: String) -> Result<(), ConfigError> {
    Err(ConfigError(msg))
}

impl RunConfig {
    /// Defaults, then the file, then the command line.
    pub fn layered(file: Option<&ConfigPatch>, cli: &ConfigPatch) -> RunConfig {
        let mut cfg = RunConfig::default();
        if let Some(f) = file {
            f.apply(&mut cfg);
        }
        cli.apply(&mut cfg);
        cfg
    }

    /// Checks the constraints that do not need the chain. Perturbation size
    /// and window membership are checked by the pipeline, which reports
    /// them with their own exit codes.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.omega_i.is_finite() || !self.omega_f.is_finite() {
            return bad("omega_i and omega_f must both be set".into());
        }
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return bad(format!("perturbation must be positive: mu = {}", self.mu));
        }
        if !(self.omega_i < self.omega_f) {
            return bad(format!(
                "chain must increase the frequency: omega_i = {} is not below omega_f = {}",
                self.omega_i, self.omega_f
            ));
        }
        if !(self.eps > 0.0) {
            return bad(format!("gradient tolerance must be positive: eps = {}", self.eps));
        }
        if !(self.bvp_tol > 0.0) || self.bvp_max_iter == 0 {
            return bad("inner solver needs a positive tolerance and iteration cap".into());
        }
        if !(self.h_max > 0.0 && self.h_max <= 0.01) {
            return bad(format!("grid step must lie in (0, 0.01]: h_max = {}", self.h_max));
        }
        if !(self.alpha > 0.0 && self.alpha <= 0.5) {
            return bad(format!("Nesterov step must lie in (0, 1/2]: alpha = {}", self.alpha));
        }
        if let Some(n) = self.n_override {
            if n < 4 {
                return bad(format!("transition count override must be at least 4: {n}"));
            }
        }
        Ok(())
    }
}
