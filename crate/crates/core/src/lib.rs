// negated comparisons are used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cli;
pub mod dd;
pub mod error;
pub mod fock;
pub mod gauss;
pub mod observables;
pub mod operators;
pub mod output;
pub mod qcore;
pub mod quad;
pub mod specfit;
pub mod states;

pub use error::{Error, Result};
