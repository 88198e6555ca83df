//! Dephasing of a two-level impurity in a one-dimensional Bose-Hubbard gas.
//!
//! The impurity couples to the local density `n_{i0}` only in its excited
//! level, so its coherence decays as `sqrt(L(t)) = exp(Gamma(t))`, the
//! modulus of a Loschmidt echo. This crate computes that echo three ways:
//!
//! * exactly, by diagonalizing and propagating small lattices ([`ed`]);
//! * in the superfluid, from Bogoliubov phonons ([`bogoliubov`]);
//! * deep in the Mott insulator, from doublon-holon pairs ([`mott`]);
//!
//! and quantifies memory effects through the BLP measure ([`nm`]).

pub mod basis;
pub mod bogoliubov;
pub mod ed;
pub mod eigen;
pub mod error;
pub mod grid;
pub mod hamiltonian;
pub mod lattice;
pub mod mott;
pub mod nm;
pub mod propagate;
pub mod sparse;
pub mod trace;

pub use basis::FockBasis;
pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use hamiltonian::{build_hamiltonian, number_operator, HamiltonianMatrix};
pub use lattice::{Boundary, Branch, ModelParams};
pub use trace::{DephasingTrace, EchoTrace, Provenance};
