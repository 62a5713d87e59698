//! Asymptotic-preserving micro-macro solver for one-dimensional kinetic
//! chemotaxis, with explicit kinetic, Keller-Segel and odd-even parity
//! reference schemes and an experiment harness.

pub mod chemo;
pub mod error;
pub mod grid;
pub mod harness;
pub mod initial;
pub mod kinetic_ops;
pub mod linalg;
pub mod mm_scheme;
pub mod reference_schemes;

pub use error::{Error, Result};
