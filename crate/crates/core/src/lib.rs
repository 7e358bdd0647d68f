//! Sparse-recovery laboratory: the Dantzig selector as a linear program,
//! dictionary geometry (cones, restricted isometry constants, β₂ bounds) and
//! a reproducible Monte Carlo harness for checking its error bounds.

pub mod cli;
pub mod dictionaries;
pub mod lp;
pub mod error;
pub mod empirical;
pub mod estimators;
pub mod geometry;
pub mod linalg;
pub mod rng;

pub use error::{Error, Result};
