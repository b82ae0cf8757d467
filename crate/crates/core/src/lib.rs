//! Thermal-noise laboratory for projective-cube CSS codes.
//!
//! The crate builds the (N, N/2) projective code, samples its Gibbs error
//! distribution with Metropolis-Hastings, measures error-cluster percolation
//! and runs a parallel small-set flip decoder on the sampled errors.

pub mod amplify;
pub mod checks;
pub mod code;
pub mod cube;
pub mod decoder;
pub mod error;
pub mod experiment;
pub mod gibbs;
pub mod gf2;
pub mod graph;
pub mod percolation;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};

/// Crate version plus `git describe` of the build tree.
pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+", env!("QLTC_GIT_DESCRIBE"));
