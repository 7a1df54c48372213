//! Exact construction of parametric Feynman integrands and certified partial
//! differential equations for them.
//!
//! The pipeline: a [`graph::Diagram`] yields the Symanzik polynomials and the
//! denominator `Q` ([`symanzik`]); differential operators in the invariants
//! and squared masses are pulled under the integral sign ([`pde`]); an
//! operator pair annihilates the integral when its numerators admit a
//! Griffiths pole-reduction witness ([`reduction`]), which [`verify`] searches
//! for independently and cross-checks numerically.

pub mod cli;
pub mod error;
pub mod exec;
pub mod format;
pub mod graph;
pub mod linalg;
pub mod pde;
pub mod poly;
pub mod reduction;
pub mod symanzik;
pub mod verify;

pub use error::{Error, Result};
