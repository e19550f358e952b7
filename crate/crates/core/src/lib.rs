//! Double-fractional diffusion for option pricing.
//!
//! Green functions of the space-time fractional diffusion equation (Mellin-Barnes,
//! Fourier and smearing-kernel routes), European option prices, per-day
//! calibration of (α, γ, σ) and variance-minimizing hedge ratios.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod dataio;
pub mod error;
pub mod fracops;
pub mod green;
pub mod hedging;
pub mod par;
pub mod pricing;
pub mod quad;
pub mod specfun;

pub use error::{Error, Result};
