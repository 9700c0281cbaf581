//! Tail indices, path-wise decompositions and Monte Carlo estimators for
//! upper-triangular stochastic recurrence equations `W_t = A_t W_{t-1} + B_t`.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod distributions;
pub mod error;
pub mod estimators;
pub mod garch;
pub mod io;
pub mod model;
pub mod modelfile;
pub mod quadrature;
pub mod rng;
pub mod simulate;

pub use error::{Error, Result};
