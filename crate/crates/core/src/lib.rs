//! Monte Carlo and exact analysis of the rotated surface code under heralded
//! Pauli dephasing, through its mapping to a completely packed loop model with
//! crossings.
//!
//! Each sampled flag configuration fixes a loop configuration. Closed loops
//! are parity constraints on the measurement record, the two open strands fix
//! the logical sector, and the derived quantities (conditional mutual
//! information, reference mutual information, decoder success) are computed
//! from these objects with GF(2) linear algebra.

pub mod analysis;
pub mod cmi;
pub mod decoder;
pub mod error;
pub mod f2;
pub mod lattice;
pub mod loops;
pub mod mc;
pub mod memory;
pub mod oracle;
pub mod sampler;

pub use analysis::Estimate;
pub use error::{Error, Result};
pub use lattice::LatticeSpec;
pub use sampler::{Flag, FlagConfig, NoiseParams, StreamSeed};
