//! Morse indices of discrete linear Hamiltonian action forms and
//! Maslov-type ω-indices of the associated symplectic paths.

pub mod continuous;
pub mod discrete;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod maslov;
pub mod morse;
pub mod path;
pub mod spectral;
pub mod symplectic;

pub use error::{Error, Result};
