use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Reverse;

use super::{ModelError, Violation};

/// A directed acyclic graph on nodes `0..n`, stored as ordered parent lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag {
    parents: Vec<Vec<usize>>,
    topo_order: Vec<usize>,
}

impl Dag {
    pub fn new(parents: Vec<Vec<usize>>) -> Result<Self, ModelError> {
        let violations = structural_violations(&parents);
        if !violations.is_empty() {
            return Err(ModelError::Invalid(violations.into()));
        }
        let topo_order = match topological_order(&parents) {
            Ok(order) => order,
            Err(stuck) => {
                return Err(ModelError::Invalid(
                    alloc::vec![Violation::Cycle { nodes: stuck }].into(),
                ))
            }
        };
        Ok(Dag {
            parents,
            topo_order,
        })
    }

    /// The edgeless graph on `n` nodes.
    pub fn empty(n: usize) -> Self {
        Dag {
            parents: alloc::vec![Vec::new(); n],
            topo_order: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn parent_lists(&self) -> &[Vec<usize>] {
        &self.parents
    }

    /// Nodes ordered so that every parent precedes its children.
    /// Ties are broken by lowest node index.
    pub fn topo_order(&self) -> &[usize] {
        &self.topo_order
    }

    pub fn max_in_degree(&self) -> usize {
        self.parents.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }
}

/// Range, self-loop, and duplicate checks on raw parent lists.
pub(crate) fn structural_violations(parents: &[Vec<usize>]) -> Vec<Violation> {
    let n = parents.len();
    let mut out = Vec::new();
    for (node, list) in parents.iter().enumerate() {
        for (pos, &parent) in list.iter().enumerate() {
            if parent >= n {
                out.push(Violation::ParentOutOfRange { node, parent });
            } else if parent == node {
                out.push(Violation::SelfLoop { node });
            } else if list[..pos].contains(&parent) {
                out.push(Violation::DuplicateParent { node, parent });
            }
        }
    }
    out
}

/// Kahn's algorithm with a min-heap, so the order is deterministic.
/// Self-loops are ignored here. On a cycle, returns the nodes that could not
/// be ordered.
pub(crate) fn topological_order(parents: &[Vec<usize>]) -> Result<Vec<usize>, Vec<usize>> {
    let n = parents.len();
    let mut children = alloc::vec![Vec::new(); n];
    let mut pending = alloc::vec![0usize; n];
    for (node, list) in parents.iter().enumerate() {
        for &p in list.iter().filter(|&&p| p < n && p != node) {
            children[p].push(node);
            pending[node] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&v| pending[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for &c in &children[v] {
            pending[c] -= 1;
            if pending[c] == 0 {
                ready.push(Reverse(c));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).filter(|&v| pending[v] > 0).collect())
    }
}
