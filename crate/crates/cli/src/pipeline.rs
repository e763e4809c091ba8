//! Windows, transition count, chain, skeleton, threshold gate and the
//! outer loop, followed by the output files.

use crate::config::{RunConfig, MU_BAR};
use crate::exec::RayonExecutor;
use crate::output::{shadow_rows, write_report, write_trajectory_file, RunReport};
use drift_core::bvp::{thresholds, SolverOptions, MIN_DELTA};
use drift_core::chain::{
    admissible_windows, build_skeleton, common_window, epsilon0, frequency_chain, time_bounds, transition_count,
    DriftWindow, TransitionSkeleton,
};
use drift_core::optimizer::{run_with_observer, shadow_check, DriftProblem, DriftResult, RunConfig as OuterConfig};
use drift_core::{Error, CHAIN_C};
use std::fmt;
use std::time::Instant;

/// Outcome classes with their process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    Io,
    Config,
    Window,
    Threshold,
    Divergence,
    StepCap,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Converged => 0,
            Status::Io => 1,
            Status::Config => 2,
            Status::Window => 3,
            Status::Threshold => 4,
            Status::Divergence => 5,
            Status::StepCap => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub status: Status,
    pub message: String,
}

impl CliError {
    fn new(status: Status, message: impl Into<String>) -> Self {
        CliError { status, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

fn classify(err: &Error) -> Status {
    match err.root() {
        Error::ThresholdExceeded { .. } => Status::Threshold,
        Error::Window { .. } => Status::Window,
        Error::Domain { .. } | Error::InvalidChain(_) | Error::SearchExhausted { .. } => Status::Config,
        _ => Status::Divergence,
    }
}

/// Everything fixed before the outer loop starts.
#[derive(Debug, Clone)]
pub struct Plan {
    pub eps0: f64,
    pub t_minus: f64,
    pub t_plus: f64,
    pub window: Option<DriftWindow>,
    pub n_formula: Option<usize>,
    pub n: usize,
    pub omegas: Vec<f64>,
    pub problem: DriftProblem,
}

fn describe_windows(mu: f64) -> String {
    match admissible_windows(mu) {
        Ok(ws) if !ws.is_empty() => {
            ws.iter().map(|w| format!("({:.6}, {:.6})", w.lo, w.hi)).collect::<Vec<_>>().join(", ")
        }
        _ => "none".into(),
    }
}

pub fn plan(cfg: &RunConfig) -> Result<Plan, CliError> {
    cfg.validate().map_err(|e| CliError::new(Status::Config, e.0))?;
    let mu = cfg.mu;
    if mu > MU_BAR {
        let mu0 = thresholds(MIN_DELTA).mu0;
        return Err(CliError::new(
            Status::Threshold,
            format!(
                "mu = {mu:e} exceeds the admissible bound mu_bar = {MU_BAR:e}; \
                 even the shortest certified segment (3 pi) has threshold mu0 = {mu0:e}"
            ),
        ));
    }
    let eps0 = epsilon0(mu).map_err(|e| CliError::new(Status::Config, e.to_string()))?;
    let (t_minus, t_plus) = time_bounds(mu);
    let window = common_window(cfg.omega_i, cfg.omega_f, mu).ok();
    if window.is_none() && !cfg.acknowledge_override {
        return Err(CliError::new(
            Status::Window,
            format!(
                "omega_i = {} and omega_f = {} are not inside one admissible window; \
                 at mu = {mu:e} (eps0 = {eps0:.6}) the windows are {}",
                cfg.omega_i,
                cfg.omega_f,
                describe_windows(mu)
            ),
        ));
    }
    let n_formula = if window.is_some() { transition_count(cfg.omega_i, cfg.omega_f, mu).ok() } else { None };
    let n = match (cfg.n_override, n_formula) {
        (Some(n), _) | (None, Some(n)) => n,
        (None, None) => {
            return Err(CliError::new(Status::Window, "no transition count: endpoints share no window"));
        }
    };
    let spacing = (cfg.omega_f - cfg.omega_i) / (n - 2) as f64;
    let cm = CHAIN_C * mu;
    if spacing > cm * (1.0 + 1e-9) && !cfg.acknowledge_override {
        return Err(CliError::new(
            Status::Config,
            format!(
                "consecutive chain frequencies differ by {spacing:e} > C mu = {cm:e}; \
                 use at least N = {} transitions or set acknowledge_override",
                n_formula.unwrap_or(n)
            ),
        ));
    }
    let config_err = |e: Error| CliError::new(classify(&e), e.to_string());
    let omegas = frequency_chain(cfg.omega_i, cfg.omega_f, n).map_err(config_err)?;
    let skeleton: TransitionSkeleton = build_skeleton(&omegas, mu).map_err(config_err)?;
    if !cfg.acknowledge_override {
        skeleton.check_invariants().map_err(config_err)?;
    }
    let solver = SolverOptions { tol: cfg.bvp_tol, max_iter: cfg.bvp_max_iter };
    let problem = DriftProblem::new(skeleton, mu, cfg.h_max, solver).map_err(config_err)?;
    problem.check_threshold().map_err(|e| {
        let seg = match &e {
            Error::Segment { index, .. } => format!(" on segment {index}"),
            _ => String::new(),
        };
        CliError::new(Status::Threshold, format!("{}{seg}", e.root()))
    })?;
    Ok(Plan { eps0, t_minus, t_plus, window, n_formula, n, omegas, problem })
}

/// A finished outer loop, converged or stopped by the step cap.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub report: RunReport,
    pub result: DriftResult,
}

/// Runs the loop and writes both output files.
pub fn execute(cfg: &RunConfig, observe: &mut dyn FnMut(usize, f64)) -> Result<Outcome, CliError> {
    let plan = plan(cfg)?;
    let exec = RayonExecutor::new(cfg.threads).map_err(|e| CliError::new(Status::Config, e.to_string()))?;
    let outer = OuterConfig { eps: cfg.eps, max_steps: cfg.max_steps, alpha: cfg.alpha };
    let start = Instant::now();
    let result = run_with_observer(&plan.problem, &outer, &exec, observe).map_err(|f| {
        CliError::new(classify(&f.error), format!("outer step {}: {}", f.state.r, f.error))
    })?;
    let elapsed = start.elapsed().as_secs_f64();
    let report = build_report(cfg, &plan, &result, elapsed);
    write_trajectory_file(&result, &cfg.trajectory)
        .map_err(|e| CliError::new(Status::Io, format!("{}: {e}", cfg.trajectory.display())))?;
    write_report(&report, &cfg.report)
        .map_err(|e| CliError::new(Status::Io, format!("{}: {e}", cfg.report.display())))?;
    let status = if result.converged { Status::Converged } else { Status::StepCap };
    Ok(Outcome { status, report, result })
}

pub fn build_report(cfg: &RunConfig, plan: &Plan, result: &DriftResult, elapsed: f64) -> RunReport {
    let shadow = shadow_check(result, cfg.omega_i, cfg.omega_f, cfg.mu);
    let (start_row, end_row) = shadow_rows(result, &shadow);
    let th: Vec<_> = plan.problem.skeleton.t0.windows(2).map(|w| thresholds(w[1] - w[0])).collect();
    let n = result.n();
    let t_drift = result.drift_time();
    let (wall_s, per_bvp) = if cfg.deterministic {
        (0.0, 0.0)
    } else {
        (elapsed, 1e3 * elapsed / result.bvp_solves.max(1) as f64)
    };
    RunReport {
        mu: cfg.mu,
        omega_i: cfg.omega_i,
        omega_f: cfg.omega_f,
        n_transitions: n,
        n_formula: plan.n_formula,
        n_override: cfg.n_override,
        t_drift,
        t_drift_per_n: t_drift / n as f64,
        nesterov_steps: result.steps,
        converged: result.converged,
        final_grad_norm: result.grad_norm_history.last().copied().unwrap_or(f64::NAN),
        eps: cfg.eps,
        alpha: cfg.alpha,
        h_max: cfg.h_max,
        action: result.action_history.last().copied().unwrap_or(f64::NAN),
        wall_time_s: wall_s,
        wall_time_per_bvp_ms: per_bvp,
        bvp_solves: result.bvp_solves,
        max_speed_mismatch: result.max_speed_mismatch(),
        shadow_start_row: start_row,
        shadow_end_row: end_row,
        shadow_dev_start: shadow.dev_start,
        shadow_dev_end: shadow.dev_end,
        shadow_bound: shadow.bound,
        shadow_passed: shadow.passed,
        eps0: plan.eps0,
        t_minus: plan.t_minus,
        t_plus: plan.t_plus,
        window_lo: plan.window.map(|w| w.lo),
        window_hi: plan.window.map(|w| w.hi),
        mu0_min: plan.problem.mu0_min(),
        r0_min: th.iter().map(|t| t.r0).fold(f64::INFINITY, f64::min),
        mu0_segments: th.iter().map(|t| t.mu0).collect(),
        r0_segments: th.iter().map(|t| t.r0).collect(),
        grad_norm_history: result.grad_norm_history.clone(),
    }
}
