//! Wiener-chaos spectral solver for Kolmogorov equations of 1-D semilinear SPDEs.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod drift;
pub mod error;
pub mod exec;
pub mod field_solution;
pub mod galerkin;
pub mod hermite;
pub mod initial;
pub mod linalg;
pub mod mc;
pub mod multiindex;
pub mod reference;
pub mod runner;
pub mod spectral_basis;
pub mod validation;

pub use error::{Error, ErrorKind, Result};
pub use exec::Execution;
