//! Certified two-sided bounds for the analytic capacity of compact plane sets,
//! closed-form reference values, Melnikov's discrete capacity, and a harness
//! for subadditivity experiments on unions of disks.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod config;
pub mod discrete;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod integrals;
pub mod lab;
pub mod solver;
pub mod special;

pub use error::{Error, Result};
