//! Travelling waves for a thermo-diffusive model of lean spray flames.

// `!(x > y)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod banded;
pub mod cli;
pub mod error;
pub mod hae;
pub mod io;
pub mod model;
pub mod quad;
pub mod solver;

pub use error::{Error, Result};
