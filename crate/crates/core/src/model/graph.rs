use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::{BayesNet, Dag, ModelError};
use crate::scalar::Scalar;

/// Simple undirected graph on nodes `0..n` with symmetric adjacency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UndirectedGraph {
    adjacency: Vec<BTreeSet<usize>>,
}

impl UndirectedGraph {
    pub fn new(n: usize) -> Self {
        UndirectedGraph {
            adjacency: alloc::vec![BTreeSet::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, ModelError> {
        let mut g = UndirectedGraph::new(n);
        for &(u, v) in edges {
            for node in [u, v] {
                if node >= n {
                    return Err(ModelError::NodeOutOfRange { node, n });
                }
            }
            if u == v {
                return Err(ModelError::Invalid(
                    alloc::vec![super::Violation::SelfLoop { node: u }].into(),
                ));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    /// Adds `u - v`; self-loops are ignored.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u != v {
            self.adjacency[u].insert(v);
            self.adjacency[v].insert(u);
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].contains(&v)
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.range(u + 1..).map(move |&v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(BTreeSet::len).sum::<usize>() / 2
    }
}

/// Moral graph of a DAG: drop directions and marry every pair of co-parents.
pub fn moralize_dag(dag: &Dag) -> UndirectedGraph {
    let mut g = UndirectedGraph::new(dag.len());
    for child in 0..dag.len() {
        let parents = dag.parents(child);
        for (i, &p) in parents.iter().enumerate() {
            g.add_edge(p, child);
            for &other in &parents[i + 1..] {
                g.add_edge(p, other);
            }
        }
    }
    g
}

pub fn moralize<S: Scalar>(net: &BayesNet<S>) -> UndirectedGraph {
    moralize_dag(net.dag())
}
