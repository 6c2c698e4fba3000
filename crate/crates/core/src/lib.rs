//! Effective capacity of the shadowed Beaulieu-Xie (SBX) composite fading
//! channel.
//!
//! The SBX model combines a Beaulieu-Xie multipath envelope (noncentral-chi
//! family, parameters `m_x`, `omega_x`) with Nakagami-m shadowing of the
//! dominant components (`m_y`, `omega_y`). This crate computes the
//! delay-constrained throughput R(θ) = −(1/A) log₂ E[(1+γ)^{-A}] of that
//! channel three independent ways:
//!
//! - [`effcap::effective_capacity_exact`] — the closed-form series in
//!   Tricomi-U functions, with a certified truncation bound;
//! - [`oracle::ec_quadrature`] — direct adaptive quadrature of the defining
//!   expectation against the SNR density;
//! - [`oracle::ec_monte_carlo`] — a seeded, shardable Monte-Carlo estimate
//!   from exact channel samples.
//!
//! High-SNR and low-SNR (wideband slope / minimum energy per bit) closed
//! forms round out the analysis. All evaluators are pure functions and safe
//! to call from any number of threads.

pub mod channel;
pub mod effcap;
pub mod error;
pub mod oracle;
pub mod specfun;

pub use error::{Error, Result};
