//! Adaptive bit loading for an OFDM secondary user sharing spectrum with a
//! narrowband primary user.
//!
//! The crate is `no_std` (with `alloc`). Everything here is a pure function
//! of its inputs and an explicit random source, so Monte Carlo drivers can
//! fan trials out across threads and still reproduce results bit for bit.
//!
//! Layout:
//! - [`config`]: system parameters and derived quantities.
//! - [`channel`]: exponential-PDP Rayleigh channel realizations.
//! - [`interference`]: narrowband interferer variance after the receiver FFT,
//!   analytic and Monte Carlo.
//! - [`link`]: per-subcarrier SINR and closed-form BER.
//! - [`allocator`]: greedy worst-subcarrier constellation reduction.
//! - [`verifier`]: symbol-level BER measurement.
//! - [`trial`]: one allocation instance (channel draw + SINR + allocation).
#![no_std]
#![warn(rust_2018_idioms, missing_debug_implementations)]
// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod allocator;
pub mod channel;
pub mod config;
pub mod dft;
mod error;
pub mod interference;
pub mod link;
mod math;
pub mod modem;
pub mod pulse;
pub mod rng;
pub mod trial;
pub mod verifier;

pub use error::{Error, Result};

pub use num_complex::Complex64;
