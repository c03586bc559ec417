//! File formats, reports and the `voltsite` command line on top of
//! `voltsite-core`.
//!
//! Exit codes: 0 success, 2 usage or config error, 3 validation error,
//! 4 runtime error.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod manifest;
pub mod pipeline;
pub mod svg;

pub use error::{Error, Result};
