#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cone;
pub mod config;
pub mod energy;
pub mod error;
pub mod hypotheses;
pub mod grid;
pub mod nonlinearity;
pub mod plaplacian;
pub mod quad;
pub mod rootfind;
pub mod sampling;
pub mod solver;

pub use error::{NehariError, Result};
