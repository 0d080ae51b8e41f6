//! Weak-coherent-pulse quantum key distribution laboratory.
//!
//! The crate has two halves that are meant to be checked against each other:
//!
//! * [`quantum_math`] and [`analytics`] give closed-form transmission rates,
//!   error rates and eavesdropper information for the 4-state, 2-state and
//!   4+2 protocols.
//! * [`sim`] and [`adversary`] run an event-level Monte Carlo of the source,
//!   the fiber, an optional eavesdropper and the receiver, and estimate the
//!   same quantities empirically.

pub mod adversary;
pub mod analytics;
mod error;
pub mod quantum_math;
pub mod sim;

pub use error::{Error, Result};
