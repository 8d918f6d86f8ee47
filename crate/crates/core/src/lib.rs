#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bounds;
pub mod certify;
pub mod cli;
pub mod config;
pub mod error;
pub mod expr;
pub mod float_json;
pub mod interp;
pub mod kernel;
pub mod quadrature;
pub mod radial;
pub mod settings;
pub mod solver;
pub mod spectral;
pub mod weight;

pub use error::{Error, Result};
