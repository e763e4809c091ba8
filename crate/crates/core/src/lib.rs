//! Variational construction of drifting orbits in the pendulum-rotator system
//!
//! ```text
//! L = Q'^2/2 + q'^2/2 + (1 - cos q) - mu (1 - cos q)(cos Q + cos t)
//! ```
//!
//! The inner layer solves one discrete boundary value problem per
//! pendulum transition. The outer layer moves the junction times and
//! rotator angles with an accelerated gradient method until the
//! concatenated broken geodesic is smooth.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bvp;
pub mod chain;
pub mod elliptic;
pub mod error;
pub mod math;
pub mod melnikov;
pub mod optimizer;
pub mod pendulum;
pub mod quadrature;
pub mod tridiag;

pub use error::{Error, Result};

/// Shared Diophantine constant `3 pi / 4`.
pub const ALPHA_TILDE: f64 = 3.0 * core::f64::consts::PI / 4.0;

/// Frequency step constant used in the transition count and chain spacing.
pub const CHAIN_C: f64 = 1.0 / 20.0;
