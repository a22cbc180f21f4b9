//! Dyadic Lorentz-space toolkit: exact exponent arithmetic, sampled functions
//! on periodic grids, Lorentz quasi-norms, Littlewood–Paley decompositions,
//! Triebel–Lizorkin/Besov/Sobolev–Lorentz norms, an interpolation and
//! embedding predicate catalog, and numerical audits of sharpness claims.

pub mod audit;
pub mod cli;
pub mod error;
pub mod exponents;
pub mod grid;
pub mod littlewood_paley;
pub mod lorentz;
pub mod oracle;
pub mod predicates;
pub mod selftest;
pub mod spaces;

pub use error::{Error, Result};
