//! File formats, cross-validation, benchmarking and the command line on top
//! of `sptrace-core`.

pub mod bench;
pub mod check;
pub mod cli;
pub mod config;
pub mod csvio;
pub mod cv;
pub mod error;
pub mod libsvm;
pub mod model;
pub mod solve;

pub use error::{Error, Result};
