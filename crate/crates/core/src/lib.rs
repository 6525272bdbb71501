//! Simulation, verification and decision toolkit for the dissipative
//! random-walk algorithm on Quantum 2-SAT.
//!
//! The algorithm repeatedly measures a uniformly chosen two-qubit clause
//! projector and, when the clause is violated, scrambles one of its two
//! qubits with a Haar-random unitary. The number of satisfied outcomes
//! decides between YES and NO instances.
//!
//! * [`instance`]: clauses, instances, generators and the JSON file format.
//! * [`densesim`]: dense state vectors, density matrices and operators.
//! * [`observables`]: total spin, Hamiltonian and spectral data.
//! * [`channel`]: exact one-step channel and multi-step evolution.
//! * [`trajectory`]: Monte Carlo unraveling of the channel.
//! * [`decision`]: thresholds and the accept/reject procedure.
//! * [`classical`]: the classical 2-SAT random walk baseline.
//! * [`suite`]: invariant suites shared by the CLI `verify` command.

pub mod channel;
pub mod classical;
pub mod decision;
pub mod densesim;
mod error;
pub mod instance;
pub mod observables;
pub mod suite;
pub mod trajectory;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Library version embedded into exported artifacts.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
