//! Jacobi elliptic functions and elliptic integrals.
//!
//! Complete integrals come from the arithmetic-geometric mean, the
//! amplitude from descending Landen back-substitution and incomplete
//! integrals from Carlson's symmetric forms. Close to the separatrix
//! (`k' < 1e-7`) the amplitude uses the `k = 1` closed forms with a
//! first-order `k'^2` correction.
//!
//! The modulus is stored together with its complement so that orbits
//! with `k'` far below `f64::EPSILON` (where `k` itself rounds to 1)
//! still carry a finite period.

use crate::error::{Error, Result};
use crate::math::{abs, asin, atan, atan2, cosh, exp, round, sin, sinh, sqrt, tanh};
use core::f64::consts::{FRAC_PI_2, PI};

/// Below this complementary modulus the Landen phase recovery is replaced
/// by the near-separatrix expansion.
pub const NEAR_SEPARATRIX: f64 = 1e-7;

const AGM_MAX_ITER: usize = 64;

/// Arithmetic-geometric mean of two non-negative numbers.
pub fn agm(a: f64, b: f64) -> f64 {
    let (mut a, mut b) = (a, b);
    for _ in 0..AGM_MAX_ITER {
        if abs(a - b) <= 4.0 * f64::EPSILON * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = sqrt(a * b);
        a = an;
    }
    0.5 * (a + b)
}

/// A modulus `k` together with `k'` and the cached complete integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticModulus {
    pub k: f64,
    pub kprime: f64,
    /// `K(k)`; infinite at `k = 1`.
    pub big_k: f64,
    /// `K(k')`; infinite at `k = 0`.
    pub big_kprime: f64,
    /// `E(k)`.
    pub big_e: f64,
}

impl EllipticModulus {
    pub fn new(k: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&k) {
            return Err(Error::Domain { what: "modulus k", value: k });
        }
        Ok(Self::build(k, sqrt((1.0 - k) * (1.0 + k))))
    }

    /// Builds the modulus from `k'`, which keeps full relative precision
    /// for orbits very close to the separatrix.
    pub fn from_kprime(kprime: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&kprime) {
            return Err(Error::Domain { what: "complementary modulus k'", value: kprime });
        }
        Ok(Self::build(sqrt((1.0 - kprime) * (1.0 + kprime)), kprime))
    }

    fn build(k: f64, kprime: f64) -> Self {
        let big_k = if kprime == 0.0 { f64::INFINITY } else { FRAC_PI_2 / agm(1.0, kprime) };
        let big_kprime = if k == 0.0 { f64::INFINITY } else { FRAC_PI_2 / agm(1.0, k) };
        let big_e = if kprime == 0.0 { 1.0 } else { complete_e_agm(k, kprime, big_k) };
        EllipticModulus { k, kprime, big_k, big_kprime, big_e }
    }

    /// The complementary modulus `k'`, with the roles of `K` and `K'` swapped.
    pub fn complement(&self) -> Self {
        Self::build(self.kprime, self.k)
    }

    /// Jacobi amplitude `am(u, k)`.
    pub fn am(&self, u: f64) -> f64 {
        self.eval(u).am
    }

    /// `(sn, cn, dn)` at `u`.
    pub fn sn_cn_dn(&self, u: f64) -> (f64, f64, f64) {
        let j = self.eval(u);
        (j.sn, j.cn, j.dn)
    }

    /// Amplitude and the copolar trio in one pass.
    pub fn eval(&self, u: f64) -> Jacobi {
        if self.k == 0.0 {
            return Jacobi { am: u, sn: sin(u), cn: crate::math::cos(u), dn: 1.0 };
        }
        if !self.big_k.is_finite() {
            // exactly on the separatrix: no period to reduce by
            let (j, _) = separatrix_expansion(abs(u), 0.0);
            return j.with_sign(u < 0.0);
        }
        let period = 2.0 * self.big_k;
        let m = round(u / period);
        let r = u - m * period;
        let neg = r < 0.0;
        let r = abs(r).min(self.big_k);
        let j = if self.kprime < NEAR_SEPARATRIX {
            self.near_separatrix(r)
        } else {
            let am = landen_am(r, self.k, self.kprime);
            let (s, c) = (sin(am), crate::math::cos(am));
            Jacobi { am, sn: s, cn: c, dn: sqrt(c * c + self.kprime * self.kprime * s * s) }
        };
        let mut j = j.with_sign(neg);
        j.am += m * PI;
        // m is integral; parity decides the sign flip of sn and cn
        if (m as i64) % 2 != 0 {
            j.sn = -j.sn;
            j.cn = -j.cn;
        }
        j
    }

    // 0 <= r <= K. Expansion about u = 0 for r <= K/2, quarter-period
    // reflection about u = K beyond that.
    fn near_separatrix(&self, r: f64) -> Jacobi {
        let kp = self.kprime;
        if r <= 0.5 * self.big_k {
            return separatrix_expansion(r, kp).0;
        }
        let v = self.big_k - r;
        let (jv, _) = separatrix_expansion(v, kp);
        Jacobi {
            am: atan2(jv.cn, kp * jv.sn),
            sn: jv.cn / jv.dn,
            cn: kp * jv.sn / jv.dn,
            dn: kp / jv.dn,
        }
    }

    /// Incomplete integral of the first kind `F(phi, k)`.
    pub fn incomplete_f(&self, phi: f64) -> f64 {
        let m = round(phi / PI);
        let r = phi - m * PI;
        let (s, c) = (sin(r), crate::math::cos(r));
        let base = s * carlson_rf(c * c, c * c + self.kprime * self.kprime * s * s, 1.0);
        if m == 0.0 {
            base
        } else {
            2.0 * m * self.big_k + base
        }
    }

    /// Incomplete integral of the second kind `E(phi, k)`.
    pub fn incomplete_e(&self, phi: f64) -> f64 {
        let m = round(phi / PI);
        let r = phi - m * PI;
        let (s, c) = (sin(r), crate::math::cos(r));
        let q = c * c + self.kprime * self.kprime * s * s;
        let k2 = self.k * self.k;
        let base = s * carlson_rf(c * c, q, 1.0) - k2 * s * s * s / 3.0 * carlson_rd(c * c, q, 1.0);
        base + 2.0 * m * self.big_e
    }
}

/// Amplitude and copolar trio at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobi {
    pub am: f64,
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

impl Jacobi {
    fn with_sign(mut self, neg: bool) -> Self {
        if neg {
            self.am = -self.am;
            self.sn = -self.sn;
        }
        self
    }
}

// k = 1 closed forms plus the O(k'^2) correction, valid for 0 <= u <= K/2.
// Second value is the Gudermannian, handy for tests.
fn separatrix_expansion(u: f64, kp: f64) -> (Jacobi, f64) {
    let c = 0.25 * kp * kp;
    let th = tanh(u);
    let sech = if u > 350.0 { 0.0 } else { 1.0 / cosh(u) };
    let gd = 2.0 * atan(exp(u)) - FRAC_PI_2;
    if c == 0.0 {
        return (Jacobi { am: gd, sn: th, cn: sech, dn: sech }, gd);
    }
    let sc = sinh(u) * cosh(u);
    let j = Jacobi {
        am: gd + c * (sc - u) * sech,
        sn: th + c * (sc - u) * sech * sech,
        cn: sech + c * (u - sc) * th * sech,
        dn: sech + c * (sc + u) * th * sech,
    };
    (j, gd)
}

// Descending Landen transformation; 0 <= u <= K.
fn landen_am(u: f64, k: f64, kprime: f64) -> f64 {
    let mut a = [0.0_f64; AGM_MAX_ITER + 1];
    let mut c = [0.0_f64; AGM_MAX_ITER + 1];
    a[0] = 1.0;
    c[0] = k;
    let mut b = kprime;
    let mut n = 0;
    while abs(c[n]) > f64::EPSILON * a[n] && n < AGM_MAX_ITER {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = sqrt(a[n] * b);
        n += 1;
    }
    let mut phi = libm::ldexp(a[n] * u, n as i32);
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + asin(c[j] / a[j] * sin(phi)));
    }
    phi
}

fn complete_e_agm(k: f64, kprime: f64, big_k: f64) -> f64 {
    let (mut a, mut b) = (1.0_f64, kprime);
    let mut sum = 0.5 * k * k;
    let mut pow = 0.5;
    for _ in 0..AGM_MAX_ITER {
        if abs(a - b) <= f64::EPSILON * a {
            break;
        }
        let c = 0.5 * (a - b);
        let an = 0.5 * (a + b);
        b = sqrt(a * b);
        a = an;
        pow *= 2.0;
        sum += pow * c * c;
    }
    big_k * (1.0 - sum)
}

/// Carlson's symmetric integral `R_F(x, y, z)`.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    const ERRTOL: f64 = 0.0025;
    let (mut x, mut y, mut z) = (x, y, z);
    let (mut dx, mut dy, mut dz, mut ave);
    loop {
        let (sx, sy, sz) = (sqrt(x), sqrt(y), sqrt(z));
        let lam = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        ave = (x + y + z) / 3.0;
        dx = (ave - x) / ave;
        dy = (ave - y) / ave;
        dz = (ave - z) / ave;
        if abs(dx).max(abs(dy)).max(abs(dz)) <= ERRTOL {
            break;
        }
    }
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    (1.0 + (e2 / 24.0 - 0.1 - 3.0 / 44.0 * e3) * e2 + e3 / 14.0) / sqrt(ave)
}

/// Carlson's symmetric integral `R_D(x, y, z)`.
pub fn carlson_rd(x: f64, y: f64, z: f64) -> f64 {
    const ERRTOL: f64 = 0.0015;
    const C1: f64 = 3.0 / 14.0;
    const C2: f64 = 1.0 / 6.0;
    const C3: f64 = 9.0 / 22.0;
    const C4: f64 = 3.0 / 26.0;
    const C5: f64 = 0.25 * C3;
    const C6: f64 = 1.5 * C4;
    let (mut x, mut y, mut z) = (x, y, z);
    let mut sum = 0.0;
    let mut fac = 1.0;
    let (mut dx, mut dy, mut dz, mut ave);
    loop {
        let (sx, sy, sz) = (sqrt(x), sqrt(y), sqrt(z));
        let lam = sx * (sy + sz) + sy * sz;
        sum += fac / (sz * (z + lam));
        fac *= 0.25;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        ave = 0.2 * (x + y + 3.0 * z);
        dx = (ave - x) / ave;
        dy = (ave - y) / ave;
        dz = (ave - z) / ave;
        if abs(dx).max(abs(dy)).max(abs(dz)) <= ERRTOL {
            break;
        }
    }
    let ea = dx * dy;
    let eb = dz * dz;
    let ec = ea - eb;
    let ed = ea - 6.0 * eb;
    let ee = ed + ec + ec;
    3.0 * sum
        + fac * (1.0 + ed * (-C1 + C5 * ed - C6 * dz * ee) + dz * (C2 * ee + dz * (-C3 * ec + dz * C4 * ea)))
            / (ave * sqrt(ave))
}

/// `K(k)` for `0 <= k < 1`.
pub fn complete_k(k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::Domain { what: "modulus k for K(k)", value: k });
    }
    Ok(EllipticModulus::new(k)?.big_k)
}

/// `E(k)` for `0 <= k <= 1`.
pub fn complete_e(k: f64) -> Result<f64> {
    Ok(EllipticModulus::new(k)?.big_e)
}

pub fn jacobi_am(u: f64, k: f64) -> Result<f64> {
    Ok(EllipticModulus::new(k)?.am(u))
}

pub fn jacobi_sn_cn_dn(u: f64, k: f64) -> Result<(f64, f64, f64)> {
    Ok(EllipticModulus::new(k)?.sn_cn_dn(u))
}

pub fn incomplete_e(phi: f64, k: f64) -> Result<f64> {
    Ok(EllipticModulus::new(k)?.incomplete_e(phi))
}

pub fn incomplete_f(phi: f64, k: f64) -> Result<f64> {
    Ok(EllipticModulus::new(k)?.incomplete_f(phi))
}
