//! Configuration, file formats and the command-line driver of the skyrmion
//! synapse simulator. The physics lives in `skysyn-core`.

// `!(x > 0.0)` is deliberate throughout: NaN must fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod ovf;
pub mod plot;
pub mod tables;
pub mod units;

pub use config::{ConfigError, RunConfig};
