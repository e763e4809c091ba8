//! Outer layer: accelerated gradient descent over the junctions.
//!
//! The free variables are `Z = (T_2, Q_2, ..., T_N, Q_N)`; the first and
//! last junction stay at their anchors. Each gradient evaluation solves
//! every segment and reads the one-sided velocities at the junctions:
//!
//! ```text
//! dF/dT_i = (q'+^2 - q'-^2)/2 + (Q'+^2 - Q'-^2)/2
//! dF/dQ_i = Q'- - Q'+
//! ```
//!
//! where `-` refers to the segment ending at `T_i` and `+` to the one
//! starting there.

use crate::bvp::{node_count, quasi_newton_solve, thresholds, SegmentProblem, SegmentSolution, SolverOptions};
use crate::chain::{time_bounds, wrap_m, TransitionSkeleton};
use crate::error::{Coordinate, Error, Result};
use crate::math::{abs, norm2};
use crate::pendulum::SegmentBoundary;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_4;

/// Half-side of the box each junction must stay in.
pub const BOX_HALF_SIDE: f64 = FRAC_PI_4;

/// Runs the per-segment solves of one gradient evaluation. Results must
/// come back in segment order.
pub trait SegmentExecutor {
    fn map_segments(
        &self,
        count: usize,
        job: &(dyn Fn(usize) -> Result<SegmentSolution> + Sync),
    ) -> Vec<Result<SegmentSolution>>;
}

/// Solves segments one after another.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl SegmentExecutor for Sequential {
    fn map_segments(
        &self,
        count: usize,
        job: &(dyn Fn(usize) -> Result<SegmentSolution> + Sync),
    ) -> Vec<Result<SegmentSolution>> {
        (0..count).map(job).collect()
    }
}

/// The outer variable together with the fixed end junctions.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperPoint {
    /// `(T_2, Q_2, ..., T_N, Q_N)`.
    pub z: Vec<f64>,
    pub t_first: f64,
    pub rot_first: f64,
    pub t_last: f64,
    pub rot_last: f64,
}

impl UpperPoint {
    /// Number of segments.
    pub fn n(&self) -> usize {
        self.z.len() / 2 + 1
    }

    /// Junction time `T_i`, `i = 1..=N+1`.
    pub fn t(&self, i: usize) -> f64 {
        let n = self.n();
        match i {
            1 => self.t_first,
            _ if i == n + 1 => self.t_last,
            _ => self.z[2 * (i - 2)],
        }
    }

    /// Junction angle `Q_i`, `i = 1..=N+1`.
    pub fn rot(&self, i: usize) -> f64 {
        let n = self.n();
        match i {
            1 => self.rot_first,
            _ if i == n + 1 => self.rot_last,
            _ => self.z[2 * (i - 2) + 1],
        }
    }

    pub fn with_z(&self, z: Vec<f64>) -> Self {
        UpperPoint { z, ..*self }
    }

    pub fn boundaries(&self) -> Result<Vec<SegmentBoundary>> {
        (1..=self.n())
            .map(|s| SegmentBoundary::new(s, self.t(s), self.t(s + 1), self.rot(s), self.rot(s + 1)))
            .collect()
    }
}

/// A chain ready for the outer iteration.
///
/// Node counts are fixed once from the anchors, sized so that the step
/// stays below `h_max` anywhere in the junction boxes. With fixed counts
/// the discrete action is a smooth function of the junctions.
#[derive(Debug, Clone)]
pub struct DriftProblem {
    pub skeleton: TransitionSkeleton,
    pub mu: f64,
    pub node_counts: Vec<usize>,
    pub solver: SolverOptions,
}

impl DriftProblem {
    pub fn new(skeleton: TransitionSkeleton, mu: f64, h_max: f64, solver: SolverOptions) -> Result<Self> {
        let node_counts = skeleton
            .t0
            .windows(2)
            .map(|w| node_count(w[1] - w[0] + 2.0 * BOX_HALF_SIDE, h_max))
            .collect::<Result<Vec<_>>>()?;
        Ok(DriftProblem { skeleton, mu, node_counts, solver })
    }

    pub fn n(&self) -> usize {
        self.skeleton.n
    }

    /// Smallest perturbation threshold over the anchor segments.
    pub fn mu0_min(&self) -> f64 {
        self.skeleton
            .t0
            .windows(2)
            .map(|w| thresholds(w[1] - w[0]).mu0)
            .fold(f64::INFINITY, f64::min)
    }

    /// Refuses to start when `mu` exceeds some segment's threshold.
    pub fn check_threshold(&self) -> Result<()> {
        for (s, w) in self.skeleton.t0.windows(2).enumerate() {
            let mu0 = thresholds(w[1] - w[0]).mu0;
            if self.mu > mu0 {
                return Err(Error::ThresholdExceeded { mu: self.mu, mu0 }.in_segment(s + 1));
            }
        }
        Ok(())
    }

    /// `Z_0`: the skeleton anchors.
    pub fn start_point(&self) -> UpperPoint {
        let sk = &self.skeleton;
        let n = sk.n;
        let mut z = Vec::with_capacity(2 * (n - 1));
        for i in 1..n {
            z.push(sk.t0[i]);
            z.push(sk.rot0[i]);
        }
        UpperPoint { z, t_first: sk.t0[0], rot_first: sk.rot0[0], t_last: sk.t0[n], rot_last: sk.rot0[n] }
    }

    /// Solves every segment at `point`.
    pub fn solve<E: SegmentExecutor + ?Sized>(&self, point: &UpperPoint, exec: &E) -> Result<Vec<SegmentSolution>> {
        let bounds = point.boundaries()?;
        let job = |s: usize| -> Result<SegmentSolution> {
            let p = SegmentProblem::new(bounds[s], self.node_counts[s])?;
            quasi_newton_solve(&p, self.mu, &self.solver)
        };
        exec.map_segments(bounds.len(), &job)
            .into_iter()
            .enumerate()
            .map(|(s, r)| r.map_err(|e| e.in_segment(s + 1)))
            .collect()
    }

    /// Gradient, solved segments and action at `point`.
    pub fn evaluate_gradient<E: SegmentExecutor + ?Sized>(&self, point: &UpperPoint, exec: &E) -> Result<GradientEvaluation> {
        let solutions = self.solve(point, exec)?;
        let gradient = junction_gradient(&solutions);
        let action = evaluate_action(&solutions);
        Ok(GradientEvaluation { gradient, solutions, action })
    }

    /// Fails if any free junction left its box around the anchor.
    pub fn box_check(&self, point: &UpperPoint) -> Result<()> {
        let sk = &self.skeleton;
        for i in 2..=sk.n {
            let dt = wrap_m(point.t(i) - sk.t0[i - 1]);
            if abs(dt) > BOX_HALF_SIDE {
                return Err(Error::BoxViolation { junction: i, coordinate: Coordinate::Time, displacement: dt });
            }
            let dq = wrap_m(point.rot(i) - sk.rot0[i - 1]);
            if abs(dq) > BOX_HALF_SIDE {
                return Err(Error::BoxViolation { junction: i, coordinate: Coordinate::Angle, displacement: dq });
            }
        }
        Ok(())
    }
}

/// Result of one gradient evaluation.
#[derive(Debug, Clone)]
pub struct GradientEvaluation {
    pub gradient: Vec<f64>,
    pub solutions: Vec<SegmentSolution>,
    pub action: f64,
}

/// Junction gradient from solved segments, assembled in a fixed order.
pub fn junction_gradient(solutions: &[SegmentSolution]) -> Vec<f64> {
    let mut g = Vec::with_capacity(2 * solutions.len().saturating_sub(1));
    for w in solutions.windows(2) {
        let (left, right) = (&w[0], &w[1]);
        let dt = 0.5 * (right.qdot_a * right.qdot_a - left.qdot_b * left.qdot_b)
            + 0.5 * (right.rot_dot_a * right.rot_dot_a - left.rot_dot_b * left.rot_dot_b);
        g.push(dt);
        g.push(left.rot_dot_b - right.rot_dot_a);
    }
    g
}

/// Total discrete action.
pub fn evaluate_action(solutions: &[SegmentSolution]) -> f64 {
    solutions.iter().map(|s| s.action).sum()
}

/// Iterates of the accelerated scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct NesterovState {
    pub z: UpperPoint,
    pub w: UpperPoint,
    pub r: usize,
    pub alpha: f64,
    pub grad_norm_history: Vec<f64>,
    pub action_history: Vec<f64>,
    /// `(2/alpha) (r+1)^-2 |Z_r - Z_0|^2` per step; monitored, not enforced.
    pub envelope_history: Vec<f64>,
}

impl NesterovState {
    pub fn new(z0: UpperPoint, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 0.5) {
            return Err(Error::Domain { what: "Nesterov step alpha (must be in (0, 1/2])", value: alpha });
        }
        Ok(NesterovState {
            w: z0.clone(),
            z: z0,
            r: 0,
            alpha,
            grad_norm_history: Vec::new(),
            action_history: Vec::new(),
            envelope_history: Vec::new(),
        })
    }
}

/// `W_{r+1} = Z_r - alpha grad`, `Z_{r+1} = W_{r+1} + (r+1)/(r+2) (W_{r+1} - W_r)`.
pub fn nesterov_step(state: &NesterovState, gradient: &[f64]) -> NesterovState {
    let a = state.alpha;
    let beta = (state.r + 1) as f64 / (state.r + 2) as f64;
    let w_next: Vec<f64> = state.z.z.iter().zip(gradient).map(|(z, g)| z - a * g).collect();
    let z_next: Vec<f64> = w_next.iter().zip(&state.w.z).map(|(wn, w)| wn + beta * (wn - w)).collect();
    NesterovState {
        z: state.z.with_z(z_next),
        w: state.w.with_z(w_next),
        r: state.r + 1,
        alpha: a,
        grad_norm_history: state.grad_norm_history.clone(),
        action_history: state.action_history.clone(),
        envelope_history: state.envelope_history.clone(),
    }
}

/// Outer-loop settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub eps: f64,
    pub max_steps: usize,
    pub alpha: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { eps: 1e-8, max_steps: 1000, alpha: 0.5 }
    }
}

/// Outcome of a completed run.
#[derive(Debug, Clone)]
pub struct DriftResult {
    pub point: UpperPoint,
    pub solutions: Vec<SegmentSolution>,
    pub gradient: Vec<f64>,
    pub steps: usize,
    pub converged: bool,
    pub grad_norm_history: Vec<f64>,
    pub action_history: Vec<f64>,
    pub envelope_history: Vec<f64>,
    pub bvp_solves: usize,
}

/// Run aborted by an error; carries the state reached so far.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub error: Error,
    pub state: NesterovState,
}

/// Runs the accelerated scheme from the anchors until the gradient norm
/// drops to `eps` or `max_steps` updates have been made.
pub fn run<E: SegmentExecutor + ?Sized>(
    problem: &DriftProblem,
    cfg: &RunConfig,
    exec: &E,
) -> core::result::Result<DriftResult, RunFailure> {
    run_with_observer(problem, cfg, exec, &mut |_, _| {})
}

/// As [`run`], calling `observe(r, grad_norm)` after every gradient evaluation.
pub fn run_with_observer<E: SegmentExecutor + ?Sized>(
    problem: &DriftProblem,
    cfg: &RunConfig,
    exec: &E,
    observe: &mut dyn FnMut(usize, f64),
) -> core::result::Result<DriftResult, RunFailure> {
    let z0 = problem.start_point();
    let mut state = match NesterovState::new(z0.clone(), cfg.alpha) {
        Ok(s) => s,
        Err(error) => {
            let state = NesterovState {
                w: z0.clone(),
                z: z0,
                r: 0,
                alpha: cfg.alpha,
                grad_norm_history: Vec::new(),
                action_history: Vec::new(),
                envelope_history: Vec::new(),
            };
            return Err(RunFailure { error, state });
        }
    };
    if let Err(error) = problem.check_threshold() {
        return Err(RunFailure { error, state });
    }
    let n = problem.n();
    let mut bvp_solves = 0;
    loop {
        let eval = match problem.evaluate_gradient(&state.z, exec) {
            Ok(e) => e,
            Err(error) => return Err(RunFailure { error, state }),
        };
        bvp_solves += n;
        let gnorm = norm2(&eval.gradient);
        let dist2: f64 = state.z.z.iter().zip(&z0.z).map(|(a, b)| (a - b) * (a - b)).sum();
        state.grad_norm_history.push(gnorm);
        state.action_history.push(eval.action);
        let r1 = (state.r + 1) as f64;
        state.envelope_history.push(2.0 / state.alpha / (r1 * r1) * dist2);
        observe(state.r, gnorm);
        let converged = gnorm <= cfg.eps;
        if converged || state.r >= cfg.max_steps {
            return Ok(DriftResult {
                point: state.z.clone(),
                solutions: eval.solutions,
                gradient: eval.gradient,
                steps: state.r,
                converged,
                grad_norm_history: state.grad_norm_history,
                action_history: state.action_history,
                envelope_history: state.envelope_history,
                bvp_solves,
            });
        }
        let next = nesterov_step(&state, &eval.gradient);
        if let Err(error) = problem.box_check(&next.z) {
            return Err(RunFailure { error, state: next });
        }
        state = next;
    }
}

/// One row of the joined trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    /// 1-based segment index.
    pub segment: usize,
    pub q: f64,
    pub rot: f64,
    pub rot_dot: f64,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Interior,
    /// First node of a segment.
    Start,
    /// Last node of a segment.
    End,
}

impl NodeKind {
    pub fn flag(self) -> u8 {
        match self {
            NodeKind::Interior => 0,
            NodeKind::Start => 1,
            NodeKind::End => 2,
        }
    }
}

impl DriftResult {
    pub fn n(&self) -> usize {
        self.solutions.len()
    }

    /// `T_{N+1} - T_1`.
    pub fn drift_time(&self) -> f64 {
        self.point.t_last - self.point.t_first
    }

    /// Joined trajectory. Every segment contributes all its nodes, so the
    /// interior junctions appear twice, once per adjacent segment.
    pub fn trajectory(&self) -> Vec<TrajectoryRow> {
        let mut rows = Vec::with_capacity(self.solutions.iter().map(|s| s.grid.n + 2).sum());
        for (s, sol) in self.solutions.iter().enumerate() {
            let n = sol.grid.n;
            for k in 0..=n + 1 {
                let kind = match k {
                    0 => NodeKind::Start,
                    _ if k == n + 1 => NodeKind::End,
                    _ => NodeKind::Interior,
                };
                let rot_dot = if k == n + 1 { sol.rot_dot_b } else { sol.rot_dot(k) };
                rows.push(TrajectoryRow { t: sol.grid.node(k), segment: s + 1, q: sol.q[k], rot: sol.rot[k], rot_dot, kind });
            }
        }
        rows
    }

    /// Largest rotator speed mismatch over the interior junctions.
    pub fn max_speed_mismatch(&self) -> f64 {
        self.solutions
            .windows(2)
            .map(|w| abs(w[0].rot_dot_b - w[1].rot_dot_a))
            .fold(0.0, f64::max)
    }
}

/// Comparison of the rotator speed near both ends with the target
/// frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowReport {
    /// Node index on the first segment closest to `omega_I`.
    pub start_index: usize,
    /// Node index on the last segment closest to `omega_F`.
    pub end_index: usize,
    pub dev_start: f64,
    pub dev_end: f64,
    /// `4 delta / T-(mu) + pi mu`.
    pub bound: f64,
    pub passed: bool,
    /// `|Q'(end) - Q'(start)|`.
    pub drift_gap: f64,
}

pub fn shadow_bound(mu: f64) -> f64 {
    4.0 * BOX_HALF_SIDE / time_bounds(mu).0 + core::f64::consts::PI * mu
}

fn closest(sol: &SegmentSolution, omega: f64) -> (usize, f64) {
    let n = sol.grid.n;
    let mut best = (2, f64::INFINITY);
    for k in 2..n {
        let d = abs(sol.rot_dot(k) - omega);
        if d < best.1 {
            best = (k, d);
        }
    }
    best
}

pub fn shadow_check(result: &DriftResult, omega_i: f64, omega_f: f64, mu: f64) -> ShadowReport {
    let first = &result.solutions[0];
    let last = &result.solutions[result.solutions.len() - 1];
    let (si, ds) = closest(first, omega_i);
    let (ei, de) = closest(last, omega_f);
    let bound = shadow_bound(mu);
    ShadowReport {
        start_index: si,
        end_index: ei,
        dev_start: ds,
        dev_end: de,
        bound,
        passed: ds.max(de) <= bound,
        drift_gap: abs(last.rot_dot(ei) - first.rot_dot(si)),
    }
}

/// True when the action dropped over every full window of `len` steps.
pub fn action_decreases_over_windows(history: &[f64], len: usize) -> bool {
    history.windows(len + 1).all(|w| w[len] <= w[0])
}

/// Zero vector of the outer dimension, handy for tests.
pub fn zero_gradient(n: usize) -> Vec<f64> {
    vec![0.0; 2 * (n - 1)]
}
