//! Simulation and capacity analysis for stochastic bit reservoirs.
//!
//! The crate is organized around the data flow of a capacity study:
//!
//! * [`reservoir`] builds k-local stochastic circuits driven by a scalar input
//!   and propagates either the exact bitstring distribution or sampled shots.
//! * [`readout`] turns distributions and shots into signal matrices and moves
//!   between bitstring probabilities and product-of-bits moments.
//! * [`capacity`] computes reconstruction capacities, the noise-to-signal
//!   spectrum (eigentasks) and the information processing capacity.
//! * [`experiments`] scans system size, switching-signal families, tail
//!   shapes, sample complexity and fat-shattering witnesses.
//! * [`embed`] checks the unitary-pair embedding of Bernoulli bit dynamics.
//! * [`runner`] drives experiments from JSON configs and writes manifests.

// `!(x > 0.0)` is used on purpose so that NaN lands on the rejecting side
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod embed;
mod error;
pub mod experiments;
pub mod quadrature;
pub mod readout;
pub mod reservoir;
pub mod rng;
pub mod runner;

pub use error::{Error, ErrorKind, Result};

/// Largest bit count for which dense 2^n vectors are materialized.
pub const MAX_EXACT_BITS: usize = 14;
