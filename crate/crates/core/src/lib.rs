//! Reading capacities, converse bounds and protocol simulation for quantum memory cells.
//!
//! All entropies and divergences are in bits.

// `!(x >= 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod channels;
pub mod cli;
pub mod divergences;
pub mod error;
pub mod gaussian;
pub mod linalg;
pub mod protocol;
pub mod random;

pub use error::{Error, Result};
