//! Total variation distance between discrete Bayes nets over a shared DAG,
//! estimated through probabilistic inference queries on a local partial
//! coupling of the two nets.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI, and
//! parallel sampling live in the `tvbn` companion crate.
#![no_std]

extern crate alloc;

pub mod coupling;
pub mod estimator;
pub mod inference;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod scalar;
pub mod treedecomp;

pub use scalar::{Exact, Scalar};
