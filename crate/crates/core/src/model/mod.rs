//! Discrete Bayes nets: representation, validation, evaluation, and
//! moralization.
//!
//! Nodes and symbols are 0-based. A CPT row index enumerates parent
//! assignments row-major in the declared parent order, so the first parent is
//! the most significant digit.

mod dag;
mod generate;
mod graph;
mod net;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use dag::Dag;
pub use generate::{gen_random_net, Structure};
pub use graph::{moralize, moralize_dag, UndirectedGraph};
pub use net::{BayesNet, Cpt, RawNet};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid net: {0}")]
    Invalid(ValidationReport),
    #[error("node {node} out of range for a net with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("symbol {symbol} out of range for alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("nets are not over the same DAG and alphabet: {0}")]
    StructureMismatch(String),
    #[error("bad generator parameters: {0}")]
    Generator(String),
}

/// A single defect found by validation.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    AlphabetTooSmall {
        alphabet: usize,
    },
    SelfLoop {
        node: usize,
    },
    DuplicateParent {
        node: usize,
        parent: usize,
    },
    ParentOutOfRange {
        node: usize,
        parent: usize,
    },
    Cycle {
        nodes: Vec<usize>,
    },
    CptCount {
        expected: usize,
        got: usize,
    },
    RowCount {
        node: usize,
        expected: usize,
        got: usize,
    },
    RowLength {
        node: usize,
        row: usize,
        expected: usize,
        got: usize,
    },
    NegativeEntry {
        node: usize,
        row: usize,
        symbol: usize,
    },
    RowSum {
        node: usize,
        row: usize,
        sum: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::AlphabetTooSmall { alphabet } => {
                write!(f, "alphabet size {alphabet} < 2")
            }
            Violation::SelfLoop { node } => write!(f, "self-loop at node {node}"),
            Violation::DuplicateParent { node, parent } => {
                write!(f, "duplicate parent {parent} at node {node}")
            }
            Violation::ParentOutOfRange { node, parent } => {
                write!(f, "parent {parent} out of range at node {node}")
            }
            Violation::Cycle { nodes } => write!(f, "cycle through nodes {nodes:?}"),
            Violation::CptCount { expected, got } => {
                write!(f, "expected {expected} CPTs, got {got}")
            }
            Violation::RowCount {
                node,
                expected,
                got,
            } => {
                write!(f, "expected {expected} rows at node {node}, got {got}")
            }
            Violation::RowLength {
                node,
                row,
                expected,
                got,
            } => {
                write!(
                    f,
                    "row {row} at node {node} has {got} entries, expected {expected}"
                )
            }
            Violation::NegativeEntry { node, row, symbol } => {
                write!(
                    f,
                    "negative entry at node {node}, row {row}, symbol {symbol}"
                )
            }
            Violation::RowSum { node, row, sum } => {
                write!(f, "row sum {sum} ≠ 1 at node {node}, row {row}")
            }
        }
    }
}

/// Result of [`RawNet::validate`]: empty means the net is valid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl From<Vec<Violation>> for ValidationReport {
    fn from(violations: Vec<Violation>) -> Self {
        ValidationReport { violations }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Index of the CPT row selected by `parent_symbols` (row-major, first
/// parent most significant).
pub fn row_index(parent_symbols: impl IntoIterator<Item = usize>, alphabet: usize) -> usize {
    parent_symbols
        .into_iter()
        .fold(0, |acc, s| acc * alphabet + s)
}

/// Inverse of [`row_index`].
pub fn row_assignment(mut row: usize, parent_count: usize, alphabet: usize) -> Vec<usize> {
    let mut out = alloc::vec![0; parent_count];
    for slot in out.iter_mut().rev() {
        *slot = row % alphabet;
        row /= alphabet;
    }
    out
}
