//! Optimised finite-key secret key lengths for satellite-to-ground
//! decoy-state BB84 passes.
//!
//! The pipeline runs loss profile → transmission window → expected counts →
//! key length, with the five protocol parameters optimised per point and a
//! sweep driver on top that writes CSV tables.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod format;
pub mod geometry;
pub mod keymath;
pub mod lossio;
pub mod optimizer;
pub mod sweep;

pub use error::{Error, Result};
