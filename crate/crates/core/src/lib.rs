//! Modelling toolkit for single-microwave-photon sources driven by diabatic
//! Landau-Zener sweeps in Cooper-pair-box and flux-qubit circuits.
//!
//! The crate is organised bottom-up:
//!
//! - [`units`]: physical constants and the frequency/energy convention.
//! - [`model`]: device parameter records, Hamiltonian builders and transition
//!   frequencies.
//! - [`lz`]: closed-form Landau-Zener probabilities.
//! - [`pulse`]: rise shapes, the three-segment catapult protocol and
//!   effective rise times.
//! - [`dynamics`]: time-dependent Schrödinger propagation with populations in
//!   the instantaneous eigenbasis.
//! - [`rates`]: decay and dephasing rates, usable efficiency and analytic
//!   bounds (spectral leakage, thermal occupation, decay during the protocol).
//! - [`optimize`]: constrained design optimization and fabrication envelopes.
//! - [`config`] / [`output`]: run configuration files and CSV/JSON emitters
//!   used by the command-line front end.
//!
//! Energies are carried as ordinary frequencies (E/h, Hz) everywhere; see
//! [`units`] for the conversion points.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod dynamics;
pub mod error;
#[cfg(test)]
mod invariants;
pub mod lz;
pub mod model;
pub mod optimize;
pub mod output;
pub mod pulse;
pub mod rates;
mod tableau;
pub mod units;

pub use error::{Error, Result};
