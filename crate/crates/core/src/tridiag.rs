//! Symmetric tridiagonal kernels: elimination without pivoting and
//! Sturm-count bisection.

use crate::math::abs;
use alloc::vec::Vec;

/// `LDL^T` factors of a symmetric tridiagonal matrix given by its
/// diagonal and off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagFactor {
    off: Vec<f64>,
    mult: Vec<f64>,
    pivot: Vec<f64>,
}

impl TridiagFactor {
    /// `diag.len() == n`, `off.len() == n - 1`. No pivoting; meant for
    /// positive definite input.
    pub fn new(diag: &[f64], off: &[f64]) -> Self {
        let n = diag.len();
        assert_eq!(off.len() + 1, n.max(1), "off-diagonal length");
        let mut mult = Vec::with_capacity(n);
        let mut pivot = Vec::with_capacity(n);
        mult.push(0.0);
        pivot.push(diag[0]);
        for i in 1..n {
            let l = off[i - 1] / pivot[i - 1];
            mult.push(l);
            pivot.push(diag[i] - l * off[i - 1]);
        }
        TridiagFactor { off: off.to_vec(), mult, pivot }
    }

    pub fn len(&self) -> usize {
        self.pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivot.is_empty()
    }

    /// Smallest pivot; positive iff the matrix is positive definite.
    pub fn min_pivot(&self) -> f64 {
        self.pivot.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Solves in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.len();
        for i in 1..n {
            b[i] -= self.mult[i] * b[i - 1];
        }
        b[n - 1] /= self.pivot[n - 1];
        for i in (0..n - 1).rev() {
            b[i] = (b[i] - self.off[i] * b[i + 1]) / self.pivot[i];
        }
    }
}

/// Number of eigenvalues strictly below `x`.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut p = 1.0;
    for i in 0..diag.len() {
        let e2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        p = diag[i] - x - if i == 0 { 0.0 } else { e2 / p };
        if p == 0.0 {
            p = -f64::EPSILON * (abs(diag[i]) + abs(x) + f64::MIN_POSITIVE);
        }
        if p < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue by bisection on the Sturm count.
pub fn smallest_eigenvalue(diag: &[f64], off: &[f64]) -> f64 {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = (if i > 0 { abs(off[i - 1]) } else { 0.0 }) + (if i + 1 < n { abs(off[i]) } else { 0.0 });
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-15 * abs(mid) {
            break;
        }
        if sturm_count(diag, off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
