//! Exact structure-constant computations for finite-dimensional right
//! Leibniz algebras: Leibniz residuals, lower central series, the equations
//! of Rota-Baxter, Nijenhuis, Reynolds and averaging operators, a finite
//! field brute-force oracle, and compatibility of bracket pairs.

pub mod algebra;
pub mod arith;
pub mod cli;
pub mod compat;
pub mod error;
pub mod operators;
pub mod oracle;
pub mod report;

pub use error::{Error, Result};
