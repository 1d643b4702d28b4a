//! Construction and analysis of almost complete local revivals in periodic
//! spin-S chains by exact diagonalization.
//!
//! The crate builds the chain Hamiltonian ([`model`]), diagonalizes it and
//! evolves states exactly ([`evolution`]), engineers initial states whose
//! site-1 magnetization returns to its maximum at a chosen time
//! ([`revival`]), and uses those states for preparation benchmarking
//! ([`benchmark`]) and a delayed-reveal secret protocol ([`chrono`]).
//! [`spectra`] checks the level statistics of the Hamiltonian.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmark;
pub mod chrono;
pub mod error;
pub mod evolution;
pub mod io;
pub mod linalg;
pub mod model;
pub mod revival;
pub mod rng;
pub mod spectra;
pub mod stats;

#[cfg(any(test, feature = "oracles"))]
pub mod testing;

pub use error::{Error, Result};
pub use evolution::{EigenSystem, ObservableSeries, QuantumState, SpinProbe};
pub use model::{BasisIndex, ChainSpec, Couplings, DenseOperator};
pub use num_complex::Complex64;
