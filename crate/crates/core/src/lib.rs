//! Classical U(1)-Kepler problems on the rank-one cone `C₁` of `H_n(C)`.
//!
//! The crate provides the Jordan algebra layer, charts on `C₁`, the magnetized
//! Poisson bracket on `T C₁`, the `su(n,n)` realization and the Kepler
//! observables built from it, a Hamiltonian flow integrator and randomized
//! verification suites for the bracket and quadratic identities.

pub mod cone;
pub mod dynamics;
pub mod error;
pub mod generators;
pub mod jet;
pub mod jordan;
pub mod poisson;
pub mod sample;
pub mod verify;

pub use error::{Error, Result};
pub use jordan::{AlgebraDescriptor, AlgebraElement, AlgebraKind};
