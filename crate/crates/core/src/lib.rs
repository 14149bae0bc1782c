//! Noise-aware rescheduling of commuting quantum gates.
//!
//! The crate models circuits over the {h, x, sx, rz, cx} basis, scores
//! schedules with a success-probability metric that weights each gate
//! error by how far it can propagate, and reorders commuting gates at
//! the elementary and ZZ-block level without changing depth, gate counts,
//! or the computed unitary. A stochastic Pauli simulator and a Max-Cut
//! QAOA generator close the loop from calibration data to benchmark
//! numbers.

pub mod calibration;
pub mod circuit;
pub mod commute;
pub mod dag;
pub mod error;
pub mod metrics;
pub mod qaoa;
pub mod qasm;
pub mod reschedule;
pub mod sim;
pub mod unitary;

pub use calibration::Calibration;
pub use circuit::{Circuit, Gate, GateId, GateKind, QubitId};
pub use dag::DependencyGraph;
pub use error::{Error, Result};
