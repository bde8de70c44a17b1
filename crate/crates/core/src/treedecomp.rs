//! Tree decompositions of undirected graphs.
//!
//! [`decompose`] runs the min-fill elimination heuristic (ties broken by
//! minimum degree, then lowest index) and turns the elimination cliques into
//! a tree of bags. Any valid decomposition makes variable elimination exact;
//! the width only affects cost.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::model::UndirectedGraph;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDecomposition {
    /// Each bag is a sorted list of vertices.
    pub bags: Vec<Vec<usize>>,
    /// Undirected edges between bag indices.
    pub tree_edges: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    /// A single bag holding every vertex.
    pub fn trivial(n: usize) -> Self {
        TreeDecomposition {
            bags: alloc::vec![(0..n).collect()],
            tree_edges: Vec::new(),
        }
    }

    /// Size of the largest bag minus one (0 for an empty decomposition).
    pub fn width(&self) -> usize {
        self.max_bag_size().saturating_sub(1)
    }

    pub fn max_bag_size(&self) -> usize {
        self.bags.iter().map(Vec::len).max().unwrap_or(0)
    }

    fn tree_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = alloc::vec![Vec::new(); self.bags.len()];
        for &(a, b) in &self.tree_edges {
            if a < self.bags.len() && b < self.bags.len() {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        adj
    }

    /// Whether `tree_edges` form a spanning tree over the bags.
    pub fn is_tree(&self) -> bool {
        let m = self.bags.len();
        if m == 0 {
            return self.tree_edges.is_empty();
        }
        if self.tree_edges.len() != m - 1 {
            return false;
        }
        if self
            .tree_edges
            .iter()
            .any(|&(a, b)| a >= m || b >= m || a == b)
        {
            return false;
        }
        let adj = self.tree_adjacency();
        let mut seen = alloc::vec![false; m];
        let mut stack = alloc::vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(b) = stack.pop() {
            for &c in &adj[b] {
                if !seen[c] {
                    seen[c] = true;
                    count += 1;
                    stack.push(c);
                }
            }
        }
        count == m
    }
}

/// Min-fill decomposition; the result always passes [`verify_decomposition`].
pub fn decompose(g: &UndirectedGraph) -> TreeDecomposition {
    let n = g.len();
    if n == 0 {
        return TreeDecomposition {
            bags: Vec::new(),
            tree_edges: Vec::new(),
        };
    }
    let order = min_fill_order(g);
    decomposition_from_order(g, &order)
}

/// Elimination order chosen greedily by fewest fill edges, then lowest
/// degree, then lowest vertex index.
pub fn min_fill_order(g: &UndirectedGraph) -> Vec<usize> {
    let n = g.len();
    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).clone()).collect();
    let mut alive = alloc::vec![true; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<(usize, usize, usize)> = None;
        for v in (0..n).filter(|&v| alive[v]) {
            let key = (fill_in(&adj, v), adj[v].len(), v);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
        let (_, _, v) = best.expect("a live vertex remains");
        eliminate(&mut adj, v);
        alive[v] = false;
        order.push(v);
    }
    order
}

fn fill_in(adj: &[BTreeSet<usize>], v: usize) -> usize {
    let ns: Vec<usize> = adj[v].iter().copied().collect();
    let mut missing = 0;
    for (i, &a) in ns.iter().enumerate() {
        for &b in &ns[i + 1..] {
            if !adj[a].contains(&b) {
                missing += 1;
            }
        }
    }
    missing
}

/// Connects the neighbours of `v` into a clique and detaches `v`.
fn eliminate(adj: &mut [BTreeSet<usize>], v: usize) -> Vec<usize> {
    let ns: Vec<usize> = adj[v].iter().copied().collect();
    for (i, &a) in ns.iter().enumerate() {
        for &b in &ns[i + 1..] {
            adj[a].insert(b);
            adj[b].insert(a);
        }
        adj[a].remove(&v);
    }
    adj[v].clear();
    ns
}

/// Builds the decomposition induced by eliminating vertices in `order`:
/// one bag per vertex (the vertex plus its neighbours at elimination time),
/// attached to the bag of the earliest-eliminated of those neighbours.
pub fn decomposition_from_order(g: &UndirectedGraph, order: &[usize]) -> TreeDecomposition {
    let n = g.len();
    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).clone()).collect();
    let mut position = alloc::vec![0usize; n];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    let mut bags = Vec::with_capacity(n);
    let mut tree_edges = Vec::with_capacity(n.saturating_sub(1));
    for (i, &v) in order.iter().enumerate() {
        let ns = eliminate(&mut adj, v);
        let mut bag = ns.clone();
        bag.push(v);
        bag.sort_unstable();
        bags.push(bag);
        if i + 1 < n {
            let parent = ns.iter().map(|&u| position[u]).min().unwrap_or(i + 1);
            tree_edges.push((i, parent));
        }
    }
    TreeDecomposition { bags, tree_edges }
}

/// Checks vertex coverage, edge coverage, and that the bags containing any
/// vertex form a connected subtree.
pub fn verify_decomposition(g: &UndirectedGraph, td: &TreeDecomposition) -> bool {
    let n = g.len();
    if !td.is_tree() {
        return n == 0 && td.bags.is_empty();
    }
    if td.bags.iter().flatten().any(|&v| v >= n) {
        return false;
    }
    let mut holders: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    for (b, bag) in td.bags.iter().enumerate() {
        for &v in bag {
            holders[v].push(b);
        }
    }
    if holders.iter().any(Vec::is_empty) {
        return false;
    }
    for (u, v) in g.edges() {
        let covered = td
            .bags
            .iter()
            .any(|bag| bag.contains(&u) && bag.contains(&v));
        if !covered {
            return false;
        }
    }
    let adj = td.tree_adjacency();
    let mut contains = alloc::vec![false; td.bags.len()];
    for hs in &holders {
        for &b in hs {
            contains[b] = true;
        }
        let mut seen = alloc::vec![false; td.bags.len()];
        let mut stack = alloc::vec![hs[0]];
        seen[hs[0]] = true;
        let mut reached = 1;
        while let Some(b) = stack.pop() {
            for &c in &adj[b] {
                if contains[c] && !seen[c] {
                    seen[c] = true;
                    reached += 1;
                    stack.push(c);
                }
            }
        }
        for &b in hs {
            contains[b] = false;
        }
        if reached != hs.len() {
            return false;
        }
    }
    true
}

/// Elimination order obtained by repeatedly peeling the lowest-indexed leaf
/// bag: vertices of the leaf that are absent from its neighbour appear in no
/// other bag, so eliminating them only touches variables inside the leaf.
/// Eliminating in this order never builds a factor over more than
/// `max_bag_size` variables.
pub fn elimination_order(td: &TreeDecomposition) -> Vec<usize> {
    let m = td.bags.len();
    let n = td.bags.iter().flatten().map(|&v| v + 1).max().unwrap_or(0);
    let mut adj: Vec<BTreeSet<usize>> = alloc::vec![BTreeSet::new(); m];
    for &(a, b) in &td.tree_edges {
        adj[a].insert(b);
        adj[b].insert(a);
    }
    let mut removed = alloc::vec![false; m];
    let mut done = alloc::vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut leaves: BTreeSet<usize> = (0..m).filter(|&b| adj[b].len() <= 1).collect();
    let mut remaining = m;
    while let Some(&leaf) = leaves.iter().next() {
        leaves.remove(&leaf);
        if removed[leaf] {
            continue;
        }
        let neighbour = if remaining > 1 {
            adj[leaf].iter().next().copied()
        } else {
            None
        };
        for &v in &td.bags[leaf] {
            let shared = neighbour.is_some_and(|nb| td.bags[nb].contains(&v));
            if !done[v] && !shared {
                done[v] = true;
                order.push(v);
            }
        }
        removed[leaf] = true;
        remaining -= 1;
        if let Some(nb) = neighbour {
            adj[nb].remove(&leaf);
            if adj[nb].len() <= 1 {
                leaves.insert(nb);
            }
        }
        adj[leaf].clear();
    }
    order
}

/// Largest scope (eliminated variable plus its neighbours) created when
/// eliminating `order` on `g`; returns `None` if `order` is not a permutation.
pub fn induced_scope_size(g: &UndirectedGraph, order: &[usize]) -> Option<usize> {
    let n = g.len();
    if order.len() != n {
        return None;
    }
    let mut seen = alloc::vec![false; n];
    for &v in order {
        if v >= n || seen[v] {
            return None;
        }
        seen[v] = true;
    }
    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).clone()).collect();
    let mut largest = 0;
    for &v in order {
        largest = largest.max(adj[v].len() + 1);
        eliminate(&mut adj, v);
    }
    Some(largest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn graph(n: usize, edges: &[(usize, usize)]) -> UndirectedGraph {
        UndirectedGraph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn path_has_width_one() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        let td = decompose(&g);
        assert_eq!(td.width(), 1);
        assert!(verify_decomposition(&g, &td));
    }

    #[test]
    fn triangle_has_width_two() {
        let g = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        let td = decompose(&g);
        assert_eq!(td.width(), 2);
        assert!(verify_decomposition(&g, &td));
    }

    #[test]
    fn single_bag_is_valid() {
        let g = graph(4, &[(0, 1), (2, 3), (1, 3)]);
        assert!(verify_decomposition(&g, &TreeDecomposition::trivial(4)));
    }

    #[test]
    fn dropping_a_vertex_breaks_coverage() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        let mut td = decompose(&g);
        for bag in &mut td.bags {
            bag.retain(|&v| v != 2);
        }
        assert!(!verify_decomposition(&g, &td));
    }

    #[test]
    fn broken_running_intersection_is_rejected() {
        // bags {0,1} - {1,2} - {0,2}: vertex 0 sits in two disconnected bags
        // once the middle bag lacks it.
        let g = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        let td = TreeDecomposition {
            bags: vec![vec![0, 1], vec![1, 2], vec![0, 2]],
            tree_edges: vec![(0, 1), (1, 2)],
        };
        assert!(!verify_decomposition(&g, &td));
    }

    #[test]
    fn missing_edge_cover_is_rejected() {
        let g = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        let td = TreeDecomposition {
            bags: vec![vec![0, 1], vec![1, 2]],
            tree_edges: vec![(0, 1)],
        };
        assert!(!verify_decomposition(&g, &td));
    }

    #[test]
    fn non_tree_is_rejected() {
        let g = graph(2, &[(0, 1)]);
        let td = TreeDecomposition {
            bags: vec![vec![0, 1], vec![0, 1]],
            tree_edges: vec![],
        };
        assert!(!verify_decomposition(&g, &td));
    }

    #[test]
    fn disconnected_graph_still_yields_a_tree() {
        let g = graph(5, &[(0, 1), (3, 4)]);
        let td = decompose(&g);
        assert!(td.is_tree());
        assert!(verify_decomposition(&g, &td));
        assert_eq!(td.width(), 1);
    }

    #[test]
    fn single_bag_order_is_a_permutation_of_the_bag() {
        let mut order = elimination_order(&TreeDecomposition::trivial(4));
        order.sort_unstable();
        assert_eq!(order, vec![0, 1, 2, 3]);
    }

    #[test]
    fn path_order_peels_from_an_endpoint() {
        let g = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        let td = decompose(&g);
        let order = elimination_order(&td);
        assert_eq!(order.len(), 5);
        assert!(order[0] == 0 || order[0] == 4);
        assert_eq!(induced_scope_size(&g, &order), Some(2));
    }
}
