//! Simulation library for driven-dissipative entanglement of two optical
//! emitters coupled through a lossy terahertz mode.
//!
//! The crate provides a dense Lindblad engine ([`lindblad`]), builders for
//! the system Hamiltonians at every approximation level ([`models`]),
//! entanglement and spectral diagnostics ([`observables`]), the parametric
//! stabilization conditions and parameter reduction ([`conditions`]),
//! concurrence optimization studies ([`optimize`]), and an all-optical
//! tomography simulation with detector-error mitigation ([`tomography`]).
//!
//! Every public frequency or rate is an ordinary frequency f = omega/2pi in
//! GHz; times are in ns. The 2pi conversion happens once, inside the
//! Liouvillian assembly.

pub mod error;
pub mod lapack;
pub mod qm;
pub mod lindblad;
pub mod models;
pub mod observables;
pub mod conditions;

pub use error::{CoreError, Result};
