//! Melnikov-type integrals along unperturbed rotations and the first-order
//! expansion of the action. Diagnostics and test oracles only; the outer
//! layer minimises the exact discrete action.

use crate::elliptic::EllipticModulus;
use crate::error::{Error, Result};
use crate::math::{abs, cos, exp, expm1, sin, sinh};
use crate::pendulum::{PendulumOrbit, SegmentBoundary};
use crate::quadrature::integrate_pieces;
use alloc::vec::Vec;
use core::f64::consts::PI;

const QUAD_TOL: f64 = 1e-12;

/// Classical Melnikov integral `2 pi omega / sinh(omega pi / 2)`.
pub fn melnikov_m(omega: f64) -> f64 {
    let x = 0.5 * PI * omega;
    if abs(x) < 1e-6 {
        return 4.0 * (1.0 - x * x / 6.0);
    }
    2.0 * PI * omega / sinh(x)
}

/// Half of the orbit the integral runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `[0, T-]`, right after the lower junction.
    Plus,
    /// `[-T-, 0]`, right before the upper junction.
    Minus,
}

fn breakpoints(a: f64, b: f64, omega: f64) -> Vec<f64> {
    let piece = if omega > 0.0 { (PI / omega).min(2.0) } else { 2.0 };
    let count = crate::math::ceil((b - a) / piece).max(1.0) as usize;
    (0..=count).map(|i| a + (b - a) * i as f64 / count as f64).collect()
}

/// `(Gamma, Theta) = 2 int cn^2(t/k) (cos, sin)(omega t) dt` over one half
/// of the orbit.
pub fn gamma_theta(omega: f64, orbit: &PendulumOrbit, side: Side) -> (f64, f64) {
    let m = orbit.modulus;
    let t = orbit.half_transit;
    let (a, b) = match side {
        Side::Plus => (0.0, t),
        Side::Minus => (-t, 0.0),
    };
    let pts = breakpoints(a, b, omega);
    let cn2 = |x: f64| {
        let c = m.eval(x / m.k).cn;
        c * c
    };
    let g = integrate_pieces(&|x: f64| 2.0 * cn2(x) * cos(omega * x), &pts, QUAD_TOL).value;
    let th = integrate_pieces(&|x: f64| 2.0 * cn2(x) * sin(omega * x), &pts, QUAD_TOL).value;
    (g, th)
}

/// Remainder `R(k)` of the extended Melnikov identity.
pub fn remainder(omega: f64, modulus: &EllipticModulus) -> f64 {
    let kp = modulus.kprime;
    if kp == 0.0 {
        return 0.0;
    }
    let k = modulus.k;
    let kk = modulus.big_k;
    let kkp = modulus.big_kprime;
    let comp = modulus.complement();
    let decay = 2.0 * omega * k * kkp;
    let integrand = |s: f64| {
        let j = comp.eval(2.0 * s * kkp);
        let sd = j.sn / j.dn;
        sd * sd * exp(-decay * s)
    };
    let integral = integrate_pieces(&integrand, &[0.0, 0.25, 0.5, 0.75, 1.0], 1e-14).value;
    let pref = -kp * kp * 4.0 * k * kkp * sin(omega * k * kk) / -expm1(-decay);
    pref * integral
}

/// `pi omega / sinh(omega k K') + R(k)`, the closed form of
/// `int_{-kK}^{kK} cn^2(t/k) cos(omega t) dt`.
pub fn extended_melnikov_closed_form(omega: f64, modulus: &EllipticModulus) -> f64 {
    let x = omega * modulus.k * modulus.big_kprime;
    let lead = if abs(x) < 1e-8 { PI / (modulus.k * modulus.big_kprime) } else { PI * omega / sinh(x) };
    lead + remainder(omega, modulus)
}

/// The four half-orbit integrals of one orbit at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MelnikovEvaluation {
    pub omega: f64,
    pub modulus: EllipticModulus,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub theta_plus: f64,
    pub theta_minus: f64,
    pub remainder: f64,
}

impl MelnikovEvaluation {
    pub fn compute(omega: f64, orbit: &PendulumOrbit) -> Self {
        let (gamma_plus, theta_plus) = gamma_theta(omega, orbit, Side::Plus);
        let (gamma_minus, theta_minus) = gamma_theta(omega, orbit, Side::Minus);
        MelnikovEvaluation {
            omega,
            modulus: orbit.modulus,
            gamma_plus,
            gamma_minus,
            theta_plus,
            theta_minus,
            remainder: remainder(omega, &orbit.modulus),
        }
    }
}

/// Unperturbed action of one segment,
/// `(4/k)(2E - k'^2 K) + omega^2 T-`.
pub fn segment_action_zero(orbit: &PendulumOrbit, omega: f64) -> f64 {
    let m = orbit.modulus;
    4.0 / m.k * (2.0 * m.big_e - m.kprime * m.kprime * m.big_k) + omega * omega * orbit.half_transit
}

/// Coefficient of `mu` in the action of one segment, integrated along
/// the unperturbed motion.
pub fn segment_action_one(seg: &SegmentBoundary, orbit: &PendulumOrbit) -> f64 {
    let at = MelnikovEvaluation::compute(seg.omega, orbit);
    let at1 = MelnikovEvaluation::compute(1.0, orbit);
    let lo = at.gamma_plus * cos(seg.rot_lo) - at.theta_plus * sin(seg.rot_lo) + at1.gamma_plus * cos(seg.t_lo)
        - at1.theta_plus * sin(seg.t_lo);
    let hi = at.gamma_minus * cos(seg.rot_hi) - at.theta_minus * sin(seg.rot_hi) + at1.gamma_minus * cos(seg.t_hi)
        - at1.theta_minus * sin(seg.t_hi);
    -(lo + hi)
}

/// `(F0, F1)` with `F ~ F0 + mu F1` along a chain of segments.
pub fn action_first_order(segments: &[SegmentBoundary]) -> Result<(f64, f64)> {
    for w in segments.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if b.index != a.index + 1 || a.t_hi != b.t_lo || a.rot_hi != b.rot_lo {
            return Err(Error::InvalidChain("consecutive segments must share their junction"));
        }
    }
    let mut f0 = 0.0;
    let mut f1 = 0.0;
    for seg in segments {
        let orbit = seg.orbit()?;
        f0 += segment_action_zero(&orbit, seg.omega);
        f1 += segment_action_one(seg, &orbit);
    }
    Ok((f0, f1))
}
