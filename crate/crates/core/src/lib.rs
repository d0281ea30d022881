//! Quantum master equations for open systems coupled to Drude–Lorentz baths:
//! Redfield, Davies, unified and nonsecular generators, a HEOM reference and
//! thermodynamic diagnostics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod generators;
pub mod heom;
pub mod linalg;
pub mod scenarios;
pub mod spectral;
pub mod thermo;
pub mod units;

pub use error::{Error, Result};
