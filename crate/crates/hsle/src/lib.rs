//! Simulation of hypergeometric SLE, SLE_κ(ρ) and critical Ising / FK-Ising
//! interfaces, with the numerical machinery needed to compare them.

pub mod error;
pub mod harness;
pub mod interfaces;
pub mod lattice;
pub mod loewner;
pub mod observables;
pub mod resampler;
pub mod rng;
pub mod sde;
pub mod specialfn;

pub use error::{Error, Result};
