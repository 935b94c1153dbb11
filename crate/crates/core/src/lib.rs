//! Closed-form and simulated end-to-end fidelity for two-way quantum repeater
//! chains that swap entanglement sequentially from one end to the other.
//!
//! The crate is `no_std` and only needs `alloc`. It is split into:
//!
//! - [`model`]: chain parametrization and the deterministic scalars derived
//!   from it (combined depolarizing parameter, classical delay, LLEG rates).
//! - [`channel`]: Pauli channels acting on Bell-diagonal states, noisy
//!   Bell-state measurements and the final-state closed forms.
//! - [`dense`]: a brute-force density-matrix implementation of the swap
//!   pipeline used to check [`channel`] independently.
//! - [`analytic`]: Laplace–Stieltjes transforms of the accumulated
//!   decoherence exponent, expected fidelity and secret-key rate.
//! - [`sim`]: a seeded Monte Carlo / discrete-event simulator of the same
//!   protocol, one-shot and under Poisson request streams.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analytic;
pub mod channel;
pub mod dense;
mod error;
pub mod model;
pub mod sim;

pub use error::Error;

pub type Result<T> = core::result::Result<T, Error>;
