//! Quantization of measures on metric spaces and covering-growth estimates.

// Negated comparisons reject NaN together with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod covering;
pub mod error;
pub mod measures;
pub mod numeric;
pub mod quantize;
pub mod spaces;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
