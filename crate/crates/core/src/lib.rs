//! Scattering theory, resolvents and dispersive decay for the one-dimensional
//! discrete Dirac operator `D = D_0 + Q` on two-component sequences over the integers.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod decay;
pub mod dispersion;
pub mod error;
pub mod free;
pub mod jost;
pub mod kernel;
pub mod lattice;
pub mod linalg;
pub mod propagator;
pub mod quadrature;
pub mod resolvent;
pub mod scattering;

pub use error::{Error, Result};
