//! Estimation and inference core for ARDL error-correction analysis of
//! indicator panels.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs: file formats, threads and the command line live in
//! the `ardl-lab` companion crate. Work that can be split across replications
//! (bootstrap draws, forest trees, lag grids) goes through [`exec::Executor`]
//! so callers can plug in a parallel map without changing results.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ardl;
pub mod bounds;
pub mod diagnostics;
pub mod dist;
pub mod dgp;
pub mod dlm;
pub mod error;
pub mod exec;
pub mod forest;
pub mod frame;
pub mod impute;
pub mod linalg;
pub mod ols;
pub mod presets;
pub mod rng;
pub mod rollcorr;
pub mod special;
pub mod stats;
pub mod terms;

pub use error::{CoreError, Result};
