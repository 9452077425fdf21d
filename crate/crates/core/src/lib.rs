//! Gaussian quantum dynamics of a driven chiral cavity coupled to two magnon modes.
//!
//! Everything is computed at the level of 2n x 2n covariance matrices of the
//! quadratures (X_1, Y_1, ..., X_n, Y_n), with the vacuum at sigma = I/2.
//! The crate covers:
//!
//! - covariance-matrix algebra and logarithmic negativity ([`gaussian`]),
//! - model construction: quadratic Hamiltonians, drift/diffusion matrices,
//!   derived drive parameters and Bessel sidebands ([`models`]),
//! - stability via eigenvalues and the Routh-Hurwitz criterion ([`stability`]),
//! - covariance propagation and Lyapunov steady states ([`dynamics`]),
//! - entanglement reports and closed-form limits ([`entanglement`]),
//! - deterministic parameter-grid sweeps ([`sweep`]), parallel by default
//!   (`parallel` feature) with a sequential fallback.
//!
//! Units: configuration values are cyclic frequencies in GHz (the values a
//! caption writes as omega/2pi); all internal math uses angular rad/ns and
//! time in ns.

// `!(x >= 0.0)` guards are deliberate: unlike `x < 0.0` they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod entanglement;
mod error;
pub mod gaussian;
pub mod models;
pub mod stability;
pub mod sweep;

pub use error::{Error, Result};

/// 2 pi, the cyclic-GHz to angular-rad/ns conversion factor.
pub const TAU: f64 = std::f64::consts::TAU;
