//! Report and trajectory files.

use drift_core::optimizer::{DriftResult, ShadowReport};
use serde::Serialize;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

/// Everything a run records. Key names are stable; see the README.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub mu: f64,
    pub omega_i: f64,
    pub omega_f: f64,
    pub n_transitions: usize,
    /// Count from the frequency span, absent if the endpoints share no window.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_formula: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_override: Option<usize>,
    pub t_drift: f64,
    pub t_drift_per_n: f64,
    pub nesterov_steps: usize,
    pub converged: bool,
    pub final_grad_norm: f64,
    pub eps: f64,
    pub alpha: f64,
    pub h_max: f64,
    pub action: f64,
    pub wall_time_s: f64,
    pub wall_time_per_bvp_ms: f64,
    pub bvp_solves: usize,
    pub max_speed_mismatch: f64,
    /// Data-row indices (0-based, header excluded) in the trajectory file.
    pub shadow_start_row: usize,
    pub shadow_end_row: usize,
    pub shadow_dev_start: f64,
    pub shadow_dev_end: f64,
    pub shadow_bound: f64,
    pub shadow_passed: bool,
    pub eps0: f64,
    pub t_minus: f64,
    pub t_plus: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_hi: Option<f64>,
    pub mu0_min: f64,
    pub r0_min: f64,
    pub mu0_segments: Vec<f64>,
    pub r0_segments: Vec<f64>,
    pub grad_norm_history: Vec<f64>,
}

/// Maps the segment-local shadow nodes to trajectory rows.
pub fn shadow_rows(result: &DriftResult, shadow: &ShadowReport) -> (usize, usize) {
    let before_last: usize = result.solutions[..result.n() - 1].iter().map(|s| s.grid.n + 2).sum();
    (shadow.start_index, before_last + shadow.end_index)
}

pub fn write_report(report: &RunReport, path: &Path) -> io::Result<()> {
    let text = toml::to_string(report).map_err(io::Error::other)?;
    std::fs::write(path, text)
}

pub const TRAJECTORY_HEADER: &str = "# t segment q Q Qdot flag";

/// One row per grid node of every segment. Junctions appear once per
/// adjacent segment; `flag` is 0 inside a segment, 1 at its first node
/// and 2 at its last.
pub fn write_trajectory(result: &DriftResult, out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for r in result.trajectory() {
        writeln!(out, "{:e} {} {:e} {:e} {:e} {}", r.t, r.segment, r.q, r.rot, r.rot_dot, r.kind.flag())?;
    }
    Ok(())
}

pub fn write_trajectory_file(result: &DriftResult, path: &Path) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_trajectory(result, &mut w)?;
    w.flush()
}
