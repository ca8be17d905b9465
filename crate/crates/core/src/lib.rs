//! Quadratic bosonic lattices with a dissipative pairing jump operator.
//!
//! A model is a number-conserving hopping matrix `H` plus linear jump
//! operators `L = Σ u_i a_i + v_i a_i†`. The pairing jump
//! `L = √κ (a_{0̄} + η a†_{1̄})` drives the lattice into a pure Gaussian
//! steady state as long as `η` stays below a wavefunction-determined
//! threshold `η_c`.
//!
//! ```
//! use dissipair::lattice::{build_three_mode, eigenpairs, DEGENERACY_TOL};
//! use dissipair::stability::eta_critical_wavefunction;
//!
//! let lat = build_three_mode(0.75, 1.0);
//! let modes = eigenpairs(&lat.hamiltonian, DEGENERACY_TOL).unwrap();
//! let eta_c = eta_critical_wavefunction(&modes, 0, 2).unwrap().critical_value;
//! assert!((eta_c - 0.75).abs() < 1e-12);
//! ```

pub mod entanglement;
pub mod error;
pub mod gaussian;
pub mod lattice;
pub mod linalg;
pub mod output;
pub mod stability;
pub mod steady;

#[cfg(doctest)]
pub mod guide;

pub use error::{Error, Result};
