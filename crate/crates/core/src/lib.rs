//! Least-squares Monte Carlo pricing of Bermudan options.
//!
//! The crate implements three regression-based estimators over simulated
//! geometric Brownian motion paths:
//!
//! * `LSM`: the classical least-squares Monte Carlo estimator, where each
//!   exercise decision compares the payout with the fitted continuation value.
//! * `LOOLSM`: the same backward induction, but every path decides with the
//!   leave-one-out prediction `C' = C - h e / (1 - h)`, which removes the
//!   look-ahead bias at `O(NM)` extra cost.
//! * `LSM-2`: the two-pass estimator, which estimates the exercise policy on an
//!   independent path set.
//!
//! Everything here is `no_std` (with `alloc`); IO, configuration files and
//! the experiment driver live in the companion `loolsm-harness` crate.

#![no_std]

extern crate alloc;

pub mod contracts;
pub mod engine;
mod error;
pub mod market;
pub mod normal;
pub mod oracles;
pub mod regression;
pub mod stats;

pub use error::{Error, Result};
