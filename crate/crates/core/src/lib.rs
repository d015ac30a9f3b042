// `!(x > 0.0)` style guards are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circle;
pub mod cli;
pub mod criteria;
pub mod error;
pub mod finite;
pub mod measures;
pub mod ud;

pub use error::{Error, Result};
