//! Maximum-likelihood symbol detection compiled to a weighted minimum-N-SAT
//! objective and solved with a simulated QAOA.
//!
//! The pipeline is:
//!
//! 1. [`constellation`]: Gray-labelled constellations, joint MIMO
//!    constellations and seeded channel instances.
//! 2. [`objective`]: squared-distance clause weights, expansion into a
//!    multilinear pseudo-Boolean polynomial and zero-coefficient prediction.
//! 3. [`hamiltonian`]: spin Hamiltonian, independent subsystems, exhaustive
//!    ground state and quadratization.
//! 4. [`simulator`]: dense statevector QAOA.
//! 5. [`optimizer`]: Nelder–Mead with seeded multi-start.
//! 6. [`harness`]: CML/QML detectors, approximation-ratio experiments,
//!    landscapes and the theorem verification suite.
//!
//! Bit strings are always written `b_0 b_1 … b_{N-1}` with `b_0` the most
//! significant bit of the constellation index. A subset of variables is a
//! `u32` mask in the same order, so the assignment mask of a bit string is
//! the constellation index it labels.

pub mod bits;
pub mod constellation;
pub mod error;
pub mod hamiltonian;
pub mod harness;
pub mod objective;
pub mod optimizer;
pub mod rng;
pub mod simulator;

pub use error::{Error, Result};

/// Largest register handled by exhaustive search and the statevector.
pub const MAX_QUBITS: usize = 24;
