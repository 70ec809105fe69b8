//! Recovery of two sparse components `w`, `z` from nonlinear observations
//! `y = g(A(Φw + Ψz)) + e`.

pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod links;
pub mod measurement;
pub mod par;
pub mod rng;
pub mod solvers;
pub mod transforms;

pub use error::{DemixError, Result};
