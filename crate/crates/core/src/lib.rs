//! Gabor phase retrieval from spectrograms on unions of squares, with
//! stability certificates and product-cubature sampling plans.

// `!(x > 0.0)` rejects NaN on purpose; index loops mirror the matrix formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cubature;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod graph;
pub mod io;
pub mod par;
pub mod signal;
pub mod stitching;
pub mod tensor;

pub use error::{Error, Result};
