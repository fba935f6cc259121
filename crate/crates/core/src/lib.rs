//! Simulation of forward-Brillouin optomechanics in a truncated Fock space.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod fockspace;
pub mod hamiltonians;
pub mod protocols;

pub use error::{Error, Result};
