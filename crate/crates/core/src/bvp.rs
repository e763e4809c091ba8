//! Inner layer: one discretised boundary value problem per transition.
//!
//! Unknowns are corrections `(v, w)` to the unperturbed pendulum and
//! rotator at the interior nodes. The scaled gradient of the discrete
//! action is
//!
//! ```text
//! Psi_q = T q + h^2 [ sin q - mu sin q (cos Q + cos t) ]
//! Psi_Q = T Q + h^2 mu sin Q (1 - cos q)
//! ```
//!
//! with `T = trid(-1, 2, -1)` and the boundary values moved to the right
//! hand side. It is driven to zero by a quasi-Newton iteration whose
//! Jacobian is frozen at `(v, w) = (0, 0)`.
//!
//! Internally the pendulum is written as `q = q_lo + p` with
//! `p in [0, 2 pi]` and the rotator relative to `rot_lo`, so that the
//! second differences do not lose digits on long chains.

use crate::error::{Error, Result};
use crate::math::{cos, norm_inf, sin};
use crate::pendulum::{SegmentBoundary, PendulumOrbit};
use crate::tridiag::{smallest_eigenvalue, TridiagFactor};
use crate::ALPHA_TILDE;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Default largest admissible step.
pub const H_MAX: f64 = 0.01;
/// Shortest segment for which the inner solver is certified.
pub const MIN_DELTA: f64 = 3.0 * PI;

/// Uniform grid on `[t_a, t_b]` with `n` interior nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentGrid {
    pub n: usize,
    pub h: f64,
    pub t_a: f64,
    pub t_b: f64,
}

impl SegmentGrid {
    pub fn new(t_a: f64, t_b: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain { what: "interior node count", value: n as f64 });
        }
        if !(t_b > t_a) {
            return Err(Error::InvalidChain("grid end must exceed grid start"));
        }
        Ok(SegmentGrid { n, h: (t_b - t_a) / (n + 1) as f64, t_a, t_b })
    }

    /// Node `k` for `k = 0..=n+1`; the last node is `t_b` exactly.
    pub fn node(&self, k: usize) -> f64 {
        if k == self.n + 1 {
            self.t_b
        } else {
            self.t_a + self.h * k as f64
        }
    }

    pub fn delta(&self) -> f64 {
        self.t_b - self.t_a
    }
}

/// Smallest interior node count with `delta / (n + 1) <= h_max`.
pub fn node_count(delta: f64, h_max: f64) -> Result<usize> {
    if !(h_max > 0.0) {
        return Err(Error::Domain { what: "h_max", value: h_max });
    }
    let mut n = crate::math::ceil(delta / h_max) as usize;
    n = n.saturating_sub(1).max(2);
    while delta / (n + 1) as f64 > h_max {
        n += 1;
    }
    while n > 2 && delta / n as f64 <= h_max {
        n -= 1;
    }
    Ok(n)
}

/// Grid for a segment of length `delta` starting at 0.
pub fn make_grid(delta: f64, h_max: f64) -> Result<SegmentGrid> {
    check_delta(delta)?;
    SegmentGrid::new(0.0, delta, node_count(delta, h_max)?)
}

fn check_delta(delta: f64) -> Result<()> {
    if delta < MIN_DELTA * (1.0 - 1e-12) {
        return Err(Error::SegmentTooShort { delta, min: MIN_DELTA });
    }
    Ok(())
}

/// Perturbation threshold `mu0` and certified radius `r0` of a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub mu0: f64,
    pub r0: f64,
}

pub fn thresholds(delta: f64) -> Thresholds {
    let a2 = ALPHA_TILDE * ALPHA_TILDE;
    let d2 = delta * delta;
    Thresholds {
        mu0: a2 * PI * PI / (8.0 * d2 * (8.0 * d2 + 3.0 * a2)),
        r0: PI * PI / (8.0 * d2 + 3.0 * a2),
    }
}

/// Corrections to the unperturbed solution at the interior nodes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorrectionPair {
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

impl CorrectionPair {
    pub fn zeros(n: usize) -> Self {
        CorrectionPair { v: vec![0.0; n], w: vec![0.0; n] }
    }
}

/// A segment ready to be solved: sampled unperturbed motion and the
/// factorised frozen Jacobian.
#[derive(Debug, Clone)]
pub struct SegmentProblem {
    pub boundary: SegmentBoundary,
    pub grid: SegmentGrid,
    pub orbit: PendulumOrbit,
    pub thresholds: Thresholds,
    // q0 - q_lo at nodes 0..=n+1
    phase: Vec<f64>,
    // T applied to the sampled phase, boundary terms included
    defect: Vec<f64>,
    // Q0 at interior nodes
    rot0: Vec<f64>,
    times: Vec<f64>,
    jv: TridiagFactor,
    jw: TridiagFactor,
}

impl SegmentProblem {
    /// Samples the unperturbed motion on `n` interior nodes and factorises
    /// the frozen Jacobian.
    pub fn new(boundary: SegmentBoundary, n: usize) -> Result<Self> {
        let delta = boundary.delta();
        check_delta(delta)?;
        let grid = SegmentGrid::new(boundary.t_lo, boundary.t_hi, n)?;
        let orbit = boundary.orbit()?;
        let m = orbit.modulus;
        let phase: Vec<f64> = (0..n + 2)
            .map(|k| match k {
                0 => 0.0,
                _ if k == n + 1 => 2.0 * PI,
                _ => 2.0 * m.am(grid.h * k as f64 / m.k),
            })
            .collect();
        let defect = (1..=n).map(|k| 2.0 * phase[k] - phase[k - 1] - phase[k + 1]).collect();
        let times: Vec<f64> = (1..=n).map(|k| grid.node(k)).collect();
        let rot0 = times
            .iter()
            .map(|t| boundary.rot_lo + boundary.omega * (t - boundary.t_lo))
            .collect();
        let h2 = grid.h * grid.h;
        let dv: Vec<f64> = (1..=n).map(|k| 2.0 - h2 * cos(phase[k])).collect();
        let off = vec![-1.0; n - 1];
        let jv = TridiagFactor::new(&dv, &off);
        let jw = TridiagFactor::new(&vec![2.0; n], &off);
        Ok(SegmentProblem {
            boundary,
            grid,
            orbit,
            thresholds: thresholds(delta),
            phase,
            defect,
            rot0,
            times,
            jv,
            jw,
        })
    }

    /// Problem on the default grid for `h_max`.
    pub fn with_h_max(boundary: SegmentBoundary, h_max: f64) -> Result<Self> {
        check_delta(boundary.delta())?;
        Self::new(boundary, node_count(boundary.delta(), h_max)?)
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    /// Unperturbed pendulum angle at interior node `k` (1-based).
    pub fn q0(&self, k: usize) -> f64 {
        self.boundary.q_lo() + self.phase[k]
    }

    /// Unperturbed rotator angle at interior node `k` (1-based).
    pub fn rot0(&self, k: usize) -> f64 {
        self.rot0[k - 1]
    }

    /// Diagonal and off-diagonal of the pendulum block of the frozen Jacobian.
    pub fn jacobian_v_block(&self) -> (Vec<f64>, Vec<f64>) {
        let h2 = self.grid.h * self.grid.h;
        let n = self.n();
        ((1..=n).map(|k| 2.0 - h2 * cos(self.phase[k])).collect(), vec![-1.0; n - 1])
    }

    /// Applies the frozen Jacobian's inverse to `rhs = (rv, rw)` in place.
    pub fn solve_j0(&self, rv: &mut [f64], rw: &mut [f64]) {
        self.jv.solve_in_place(rv);
        self.jw.solve_in_place(rw);
    }

    /// `Psi(v, w; mu)`, laid out as `[q rows; Q rows]`.
    pub fn residual(&self, pair: &CorrectionPair, mu: f64) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; 2 * n];
        self.residual_into(pair, mu, &mut out);
        out
    }

    fn residual_into(&self, pair: &CorrectionPair, mu: f64, out: &mut [f64]) {
        let n = self.n();
        let h2 = self.grid.h * self.grid.h;
        let (v, w) = (&pair.v, &pair.w);
        for k in 0..n {
            let vl = if k > 0 { v[k - 1] } else { 0.0 };
            let vr = if k + 1 < n { v[k + 1] } else { 0.0 };
            let wl = if k > 0 { w[k - 1] } else { 0.0 };
            let wr = if k + 1 < n { w[k + 1] } else { 0.0 };
            let p = self.phase[k + 1] + v[k];
            let rot = self.rot0[k] + w[k];
            // sin q = -sin p, 1 - cos q = 1 + cos p
            let (sp, cp) = (sin(p), cos(p));
            out[k] = 2.0 * v[k] - vl - vr + self.defect[k]
                + h2 * (-sp + mu * sp * (cos(rot) + cos(self.times[k])));
            out[n + k] = 2.0 * w[k] - wl - wr + h2 * mu * sin(rot) * (1.0 + cp);
        }
    }

    /// Discrete action `h sum_{k=0}^{n} L_k` of the path `q0 + v`, `Q0 + w`.
    pub fn action(&self, pair: &CorrectionPair, mu: f64) -> f64 {
        let n = self.n();
        let h = self.grid.h;
        let b = &self.boundary;
        let p = |k: usize| if k == 0 || k == n + 1 { self.phase[k] } else { self.phase[k] + pair.v[k - 1] };
        let w = |k: usize| if k == 0 || k == n + 1 { 0.0 } else { pair.w[k - 1] };
        let mut sum = 0.0;
        for k in 0..=n {
            let qd = (p(k + 1) - p(k)) / h;
            let rd = b.omega + (w(k + 1) - w(k)) / h;
            let rot = if k == 0 { b.rot_lo } else { self.rot0[k - 1] + w(k) };
            let t = self.grid.node(k);
            let pot = 1.0 + cos(p(k));
            sum += 0.5 * rd * rd + 0.5 * qd * qd + pot - mu * pot * (cos(rot) + cos(t));
        }
        h * sum
    }
}

/// Stopping rule and iteration cap of the quasi-Newton iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-10, max_iter: 200 }
    }
}

/// Solved segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSolution {
    pub boundary: SegmentBoundary,
    pub grid: SegmentGrid,
    pub correction: CorrectionPair,
    /// Pendulum angle at nodes `0..=n+1`, boundary values included.
    pub q: Vec<f64>,
    /// Rotator angle at nodes `0..=n+1`.
    pub rot: Vec<f64>,
    pub qdot_a: f64,
    pub qdot_b: f64,
    pub rot_dot_a: f64,
    pub rot_dot_b: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub step_norms: Vec<f64>,
    pub action: f64,
}

impl SegmentSolution {
    /// Forward-difference rotator speed on node interval `k..k+1`.
    pub fn rot_dot(&self, k: usize) -> f64 {
        let w = |j: usize| if j == 0 || j == self.grid.n + 1 { 0.0 } else { self.correction.w[j - 1] };
        self.boundary.omega + (w(k + 1) - w(k)) / self.grid.h
    }

    /// Largest ratio of consecutive quasi-Newton step norms.
    pub fn contraction_ratio(&self) -> f64 {
        self.step_norms
            .windows(2)
            .filter(|s| s[0] > 0.0)
            .map(|s| s[1] / s[0])
            .fold(0.0, f64::max)
    }
}

/// Quasi-Newton iteration `(v, w) <- (v, w) - J0^{-1} Psi` from zero.
pub fn quasi_newton_solve(problem: &SegmentProblem, mu: f64, opts: &SolverOptions) -> Result<SegmentSolution> {
    let th = problem.thresholds;
    if mu > th.mu0 {
        return Err(Error::ThresholdExceeded { mu, mu0: th.mu0 });
    }
    let n = problem.n();
    let mut pair = CorrectionPair::zeros(n);
    let mut psi = vec![0.0; 2 * n];
    let mut step_norms = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        problem.residual_into(&pair, mu, &mut psi);
        let (rv, rw) = psi.split_at_mut(n);
        problem.solve_j0(rv, rw);
        for k in 0..n {
            pair.v[k] -= rv[k];
            pair.w[k] -= rw[k];
        }
        let step = norm_inf(&psi);
        step_norms.push(step);
        let norm = norm_inf(&pair.v).max(norm_inf(&pair.w));
        if norm > th.r0 {
            return Err(Error::LeftBall { iteration: iterations, norm, radius: th.r0 });
        }
        if step <= opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NotConverged { iterations, step: step_norms.last().copied().unwrap_or(0.0) });
    }
    problem.residual_into(&pair, mu, &mut psi);
    let residual_norm = norm_inf(&psi);
    Ok(assemble(problem, pair, mu, residual_norm, iterations, step_norms))
}

fn assemble(
    problem: &SegmentProblem,
    pair: CorrectionPair,
    mu: f64,
    residual_norm: f64,
    iterations: usize,
    step_norms: Vec<f64>,
) -> SegmentSolution {
    let n = problem.n();
    let b = problem.boundary;
    let h = problem.grid.h;
    let q_lo = b.q_lo();
    let mut q = Vec::with_capacity(n + 2);
    let mut rot = Vec::with_capacity(n + 2);
    q.push(q_lo);
    rot.push(b.rot_lo);
    for k in 1..=n {
        q.push(q_lo + problem.phase[k] + pair.v[k - 1]);
        rot.push(problem.rot0[k - 1] + pair.w[k - 1]);
    }
    q.push(b.q_hi());
    rot.push(b.rot_hi);
    let qdot_a = (problem.phase[1] + pair.v[0]) / h;
    let qdot_b = (2.0 * PI - problem.phase[n] - pair.v[n - 1]) / h;
    let rot_dot_a = b.omega + pair.w[0] / h;
    let rot_dot_b = b.omega - pair.w[n - 1] / h;
    let action = problem.action(&pair, mu);
    SegmentSolution {
        boundary: b,
        grid: problem.grid,
        correction: pair,
        q,
        rot,
        qdot_a,
        qdot_b,
        rot_dot_a,
        rot_dot_b,
        residual_norm,
        iterations,
        step_norms,
        action,
    }
}

/// Smallest eigenvalue of the pendulum block of the frozen Jacobian,
/// checked against the lower bound `(alpha~ / delta)^2 h^2`.
pub fn min_eigen_check(problem: &SegmentProblem) -> Result<f64> {
    let (d, e) = problem.jacobian_v_block();
    let lambda = smallest_eigenvalue(&d, &e);
    let bound = eigen_lower_bound(problem.grid.delta(), problem.grid.h);
    if lambda < bound {
        return Err(Error::EigenBound { lambda, bound });
    }
    Ok(lambda)
}

pub fn eigen_lower_bound(delta: f64, h: f64) -> f64 {
    let r = ALPHA_TILDE / delta * h;
    r * r
}
