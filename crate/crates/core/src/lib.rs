//! Finite-scale computations around the nonlinear Roth configuration
//! `x, x + y, x + qy²`: counting operators, Gowers and box norms, dual
//! functions, Diophantine approximation, local functions, a checker for the
//! supporting inequalities, and exhaustive search for configuration-free sets.

pub mod cli;
pub mod counting;
pub mod diophantine;
pub mod error;
pub mod fourier;
pub mod funcspace;
pub mod gowers;
pub mod harness;
pub mod io;
pub mod localfn;
pub mod random;
pub mod search;
pub mod sum;

pub use error::{Error, Result};
