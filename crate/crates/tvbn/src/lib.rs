//! Std companion to `tvbn-core`: JSON net files, query set specs, parallel
//! sampling, and the `tvbn` command line.

pub mod cli;
pub mod format;
pub mod parallel;
pub mod sets;

pub use format::{
    canonicalize, parse_document, parse_net, serialize_net, FormatError, NetDocument,
};
pub use parallel::{estimate_tv_parallel, estimate_tv_uniform_parallel, RunError};
