//! Unperturbed pendulum rotations and the discrete Lagrangian of the full model.

use crate::elliptic::EllipticModulus;
use crate::error::{Error, Result};
use crate::math::{abs, cos, exp, ln};
use core::f64::consts::PI;

/// A rotation of the unperturbed pendulum taking time `2 * half_transit`
/// to advance by `2 pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumOrbit {
    pub modulus: EllipticModulus,
    pub half_transit: f64,
    /// `h = k^-2 - 1`.
    pub energy: f64,
}

impl PendulumOrbit {
    pub fn from_half_transit(half: f64) -> Result<Self> {
        let modulus = modulus_from_half_transit(half)?;
        let energy = (modulus.kprime / modulus.k) * (modulus.kprime / modulus.k);
        Ok(PendulumOrbit { modulus, half_transit: half, energy })
    }
}

/// Solves `k K(k) = half` for the modulus.
///
/// For short transits Newton runs in `k`; for long ones in `s = ln k'`,
/// where `d(kK)/ds = -E/k` stays close to `-1` and the root keeps full
/// relative precision in `k'`. Both are safeguarded by bisection.
pub fn modulus_from_half_transit(half: f64) -> Result<EllipticModulus> {
    if !(half > 0.0) || !half.is_finite() {
        return Err(Error::Domain { what: "half transit time", value: half });
    }
    let tol = 1e-14 * half.max(1.0);
    if half < 1.0 {
        let g = |k: f64| -> Result<(f64, EllipticModulus)> {
            let m = EllipticModulus::new(k)?;
            Ok((m.k * m.big_k - half, m))
        };
        let (mut lo, mut hi) = (0.0, (2.0 * half / PI).min(0.9));
        let mut k = 0.5 * (lo + hi);
        for _ in 0..200 {
            let (f, m) = g(k)?;
            if abs(f) <= tol {
                return Ok(m);
            }
            if f > 0.0 {
                hi = k;
            } else {
                lo = k;
            }
            let slope = m.big_e / (m.kprime * m.kprime);
            let next = k - f / slope;
            k = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        return Ok(g(k)?.1);
    }
    let g = |s: f64| -> Result<(f64, EllipticModulus)> {
        let m = EllipticModulus::from_kprime(exp(s))?;
        Ok((m.k * m.big_k - half, m))
    };
    let mut hi = 0.0;
    let mut lo = ln(4.0) - half - 2.0;
    while g(lo)?.0 < 0.0 {
        lo -= 2.0;
    }
    let mut s = (ln(4.0) - half).clamp(lo, -1e-3);
    for _ in 0..200 {
        let (f, m) = g(s)?;
        if abs(f) <= tol {
            return Ok(m);
        }
        if f > 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        let next = s + f * m.k / m.big_e;
        s = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if hi - lo <= 4.0 * f64::EPSILON * abs(lo) {
            break;
        }
    }
    Ok(g(s)?.1)
}

/// Boundary data of one transition segment. The pendulum angle runs from
/// `(2i-3) pi` to `(2i-1) pi`; the rotator angle is free data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentBoundary {
    pub index: usize,
    pub t_lo: f64,
    pub t_hi: f64,
    pub rot_lo: f64,
    pub rot_hi: f64,
    pub omega: f64,
}

impl SegmentBoundary {
    pub fn new(index: usize, t_lo: f64, t_hi: f64, rot_lo: f64, rot_hi: f64) -> Result<Self> {
        if index == 0 {
            return Err(Error::InvalidChain("segment index starts at 1"));
        }
        if !(t_hi > t_lo) {
            return Err(Error::InvalidChain("segment end time must exceed start time"));
        }
        let omega = (rot_hi - rot_lo) / (t_hi - t_lo);
        Ok(SegmentBoundary { index, t_lo, t_hi, rot_lo, rot_hi, omega })
    }

    pub fn delta(&self) -> f64 {
        self.t_hi - self.t_lo
    }

    pub fn q_lo(&self) -> f64 {
        (2.0 * self.index as f64 - 3.0) * PI
    }

    pub fn q_hi(&self) -> f64 {
        (2.0 * self.index as f64 - 1.0) * PI
    }

    pub fn orbit(&self) -> Result<PendulumOrbit> {
        PendulumOrbit::from_half_transit(0.5 * self.delta())
    }
}

/// Unperturbed pendulum angle. Crosses the stable equilibrium at both
/// junctions and the hyperbolic one at mid-segment:
/// `q0(t) = (2i-3) pi + 2 am((t - T_lo)/k, k)`.
pub fn unperturbed_q(t: f64, seg: &SegmentBoundary, orbit: &PendulumOrbit) -> f64 {
    let m = &orbit.modulus;
    seg.q_lo() + 2.0 * m.am((t - seg.t_lo) / m.k)
}

/// Velocity of [`unperturbed_q`], `2 dn(u) / k`.
pub fn unperturbed_qdot(t: f64, seg: &SegmentBoundary, orbit: &PendulumOrbit) -> f64 {
    let m = &orbit.modulus;
    2.0 * m.eval((t - seg.t_lo) / m.k).dn / m.k
}

/// Unperturbed rotator angle, linear between the boundary values.
pub fn unperturbed_rot(t: f64, seg: &SegmentBoundary) -> f64 {
    seg.rot_lo + seg.omega * (t - seg.t_lo)
}

/// Rectangle-rule discrete Lagrangian with forward-difference velocities.
#[allow(clippy::too_many_arguments)]
pub fn discrete_lagrangian(q_k: f64, q_k1: f64, rot_k: f64, rot_k1: f64, t_k: f64, h: f64, mu: f64) -> f64 {
    let qd = (q_k1 - q_k) / h;
    let rd = (rot_k1 - rot_k) / h;
    let pot = 1.0 - cos(q_k);
    0.5 * rd * rd + 0.5 * qd * qd + pot - mu * pot * (cos(rot_k) + cos(t_k))
}
