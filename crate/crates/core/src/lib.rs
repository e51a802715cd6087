//! Exact diagonalization of frustrated spin-1/2 chains in a local magnetic field.

pub mod approx;
pub mod dynamics;
pub mod eigensolve;
pub mod error;
pub mod hamiltonian;
pub mod hilbert;
pub mod observables;
pub mod selftest;
pub mod states;

pub use error::{Error, Result};
