//! Dynamical invariants of rational maps of the Riemann sphere.

// `!(x <= tol)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annotations;
pub mod count;
pub mod cycles;
pub mod error;
pub mod extjet;
pub mod numeric;
pub mod orbits;
pub mod parabolic;
pub mod pipeline;
pub mod ratmap;
pub mod residue;

pub use error::{DynError, Result};
