//! Admissible frequency windows, the frequency chain and the skeleton of
//! junction anchors.

use crate::elliptic::EllipticModulus;
use crate::error::{Error, Result};
use crate::math::{abs, ceil, ln, sqrt, wrap_angle};
use crate::pendulum::{modulus_from_half_transit, SegmentBoundary};
use crate::{ALPHA_TILDE, CHAIN_C};
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, PI};

/// Constants of the method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodConstants {
    pub c: f64,
    pub delta: f64,
    pub mu_bar: f64,
    pub alpha_tilde: f64,
    pub h_max: f64,
    pub alpha_step: f64,
}

impl Default for MethodConstants {
    fn default() -> Self {
        MethodConstants {
            c: CHAIN_C,
            delta: FRAC_PI_4,
            mu_bar: 1e-5,
            alpha_tilde: ALPHA_TILDE,
            h_max: crate::bvp::H_MAX,
            alpha_step: 0.5,
        }
    }
}

/// `(x + pi) mod 2 pi - pi`.
pub fn wrap_m(x: f64) -> f64 {
    wrap_angle(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    pub num: u32,
    pub den: u32,
}

impl Rational {
    pub const fn new(num: u32, den: u32) -> Self {
        Rational { num, den }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Reduced fractions in `[0, 1]` with denominator at most 4, increasing.
pub fn farey4() -> [Rational; 7] {
    [
        Rational::new(0, 1),
        Rational::new(1, 4),
        Rational::new(1, 3),
        Rational::new(1, 2),
        Rational::new(2, 3),
        Rational::new(3, 4),
        Rational::new(1, 1),
    ]
}

/// Half-width of the resonance holes cut around each Farey number.
pub fn epsilon0(mu: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::Domain { what: "mu", value: mu });
    }
    let a = ALPHA_TILDE;
    Ok(8.0 * PI / a / sqrt(sqrt(9.0 * a * a + 4.0 * PI * PI / mu) - 3.0))
}

/// Open frequency interval between two neighbouring resonance holes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftWindow {
    pub lo: f64,
    pub hi: f64,
    pub farey_lo: Rational,
    pub farey_hi: Rational,
}

impl DriftWindow {
    pub fn contains(&self, omega: f64) -> bool {
        omega > self.lo && omega < self.hi
    }
}

/// The non-empty windows for `mu`, in increasing order.
pub fn admissible_windows(mu: f64) -> Result<Vec<DriftWindow>> {
    let eps = epsilon0(mu)?;
    let f = farey4();
    Ok(f.windows(2)
        .filter(|w| w[1].value() - w[0].value() > 2.0 * eps)
        .map(|w| DriftWindow { lo: w[0].value() + eps, hi: w[1].value() - eps, farey_lo: w[0], farey_hi: w[1] })
        .collect())
}

/// The window containing both frequencies.
pub fn common_window(omega_i: f64, omega_f: f64, mu: f64) -> Result<DriftWindow> {
    admissible_windows(mu)?
        .into_iter()
        .find(|w| w.contains(omega_i) && w.contains(omega_f))
        .ok_or(Error::Window { omega_i, omega_f })
}

/// `N = 4 + 2 ceil((omega_F - omega_I) / (2 C mu))`.
pub fn transition_count(omega_i: f64, omega_f: f64, mu: f64) -> Result<usize> {
    if !(omega_i < omega_f) {
        return Err(Error::InvalidChain("initial frequency must be below final frequency"));
    }
    common_window(omega_i, omega_f, mu)?;
    let x = (omega_f - omega_i) / (2.0 * CHAIN_C * mu);
    // absorb the rounding of the subtraction when the ratio is an integer
    let steps = ceil(x * (1.0 - 1e-12)).max(1.0);
    Ok(4 + 2 * steps as usize)
}

/// `N - 1` equally spaced frequencies from `omega_I` to `omega_F`.
pub fn frequency_chain(omega_i: f64, omega_f: f64, n: usize) -> Result<Vec<f64>> {
    if n < 3 {
        return Err(Error::InvalidChain("chain needs at least three transitions"));
    }
    let d = (omega_f - omega_i) / (n - 2) as f64;
    let mut out: Vec<f64> = (0..n - 1).map(|i| omega_i + i as f64 * d).collect();
    out[n - 2] = omega_f;
    Ok(out)
}

/// Lower and upper bounds on the mean transition time.
pub fn time_bounds(mu: f64) -> (f64, f64) {
    (0.75 * ln(320.0 / mu), PI * ln(640.0 / mu))
}

/// `k0 = (1 + C mu)^{-1/2}`, built from its complement for precision.
pub fn k0_modulus(mu: f64) -> Result<EllipticModulus> {
    let cm = CHAIN_C * mu;
    EllipticModulus::from_kprime(sqrt(cm / (1.0 + cm)))
}

/// Junction anchors of a transition chain.
///
/// Segment `s` (1-based) runs from `t0[s-1]` to `t0[s]` with frequency
/// `omegas[s-1]`; the last segment reuses the final frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSkeleton {
    pub n: usize,
    pub omegas: Vec<f64>,
    pub t0: Vec<f64>,
    pub rot0: Vec<f64>,
    pub mu: f64,
}

impl TransitionSkeleton {
    pub fn segment_omega(&self, s: usize) -> f64 {
        self.omegas[(s - 1).min(self.omegas.len() - 1)]
    }

    /// Boundary data of every segment at the anchors.
    pub fn boundaries(&self) -> Result<Vec<SegmentBoundary>> {
        (1..=self.n)
            .map(|s| SegmentBoundary::new(s, self.t0[s - 1], self.t0[s], self.rot0[s - 1], self.rot0[s]))
            .collect()
    }

    pub fn drift_time(&self) -> f64 {
        self.t0[self.n] - self.t0[0]
    }

    /// Checks the structural properties of the anchors. Frequency spacing
    /// is measured against `C mu`.
    pub fn check_invariants(&self) -> Result<()> {
        if self.t0.len() != self.n + 1 || self.rot0.len() != self.n + 1 || self.omegas.len() + 1 != self.n {
            return Err(Error::InvalidChain("inconsistent skeleton lengths"));
        }
        let k0 = k0_modulus(self.mu)?;
        for w in self.t0.windows(2) {
            let gap = w[1] - w[0];
            if gap < 3.0 * PI {
                return Err(Error::InvalidChain("anchor gap below 3 pi"));
            }
            if modulus_from_half_transit(0.5 * gap)?.kprime > k0.kprime {
                return Err(Error::InvalidChain("transition time too short for k >= k0"));
            }
        }
        for i in 1..self.n {
            if abs(wrap_m(self.t0[i])) > 1e-9 {
                return Err(Error::InvalidChain("anchor time not a multiple of 2 pi"));
            }
            if abs(wrap_m(self.rot0[i])) >= FRAC_PI_4 {
                return Err(Error::InvalidChain("anchor angle outside the pi/4 box"));
            }
        }
        let cm = CHAIN_C * self.mu;
        for w in self.omegas.windows(2) {
            if abs(w[1] - w[0]) > cm * (1.0 + 1e-9) {
                return Err(Error::InvalidChain("consecutive frequencies further apart than C mu"));
            }
        }
        Ok(())
    }
}

/// Default search cap `10 ceil(2 pi / eps0)`.
pub fn default_search_cap(mu: f64) -> Result<usize> {
    Ok(10 * ceil(2.0 * PI / epsilon0(mu)?) as usize)
}

/// Builds the anchors inductively from `T1 = Q1 = 0`.
pub fn build_skeleton(omegas: &[f64], mu: f64) -> Result<TransitionSkeleton> {
    build_skeleton_with_cap(omegas, mu, default_search_cap(mu)?)
}

pub fn build_skeleton_with_cap(omegas: &[f64], mu: f64, cap: usize) -> Result<TransitionSkeleton> {
    if omegas.is_empty() {
        return Err(Error::InvalidChain("empty frequency chain"));
    }
    let n = omegas.len() + 1;
    let k0 = k0_modulus(mu)?;
    let k0k0 = k0.k * k0.big_k;
    // T_i = 2 pi j_i, tracked as integers
    let mut j: Vec<u64> = Vec::with_capacity(n + 1);
    let mut rot: Vec<f64> = Vec::with_capacity(n + 1);
    j.push(0);
    rot.push(0.0);
    for i in 0..n {
        let omega = omegas[i.min(omegas.len() - 1)];
        let ji = j[i];
        let t_i = 2.0 * PI * ji as f64;
        let n_star = 1 + ceil(1.0 / 6.0 + (t_i + k0k0) / PI) as u64;
        let mut found = None;
        for tries in 0..cap {
            let nn = n_star + tries as u64;
            let jn = nn - ji;
            let gap = 2.0 * PI * (jn - ji) as f64;
            let q = rot[i] + omega * gap;
            if abs(wrap_m(q)) < FRAC_PI_4 {
                found = Some((jn, q));
                break;
            }
        }
        let (jn, q) = found.ok_or(Error::SearchExhausted { index: i + 2, cap })?;
        j.push(jn);
        rot.push(q);
    }
    Ok(TransitionSkeleton {
        n,
        omegas: omegas.to_vec(),
        t0: j.iter().map(|&x| 2.0 * PI * x as f64).collect(),
        rot0: rot,
        mu,
    })
}
