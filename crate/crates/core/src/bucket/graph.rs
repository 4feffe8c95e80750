//! Undirected dependency graphs, min-fill orderings and induced width.

use std::collections::BTreeSet;

/// Simple undirected graph over variable ids `0..n`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DependencyGraph {
    adjacency: Vec<BTreeSet<usize>>,
}

impl DependencyGraph {
    pub fn new(vertices: usize) -> Self {
        DependencyGraph {
            adjacency: vec![BTreeSet::new(); vertices],
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.adjacency.len()
    }

    /// Self-loops are ignored.
    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.adjacency[a].insert(b);
            self.adjacency[b].insert(a);
        }
    }

    /// Connects every pair of `vertices`.
    pub fn add_clique(&mut self, vertices: &[usize]) {
        for (i, &a) in vertices.iter().enumerate() {
            for &b in &vertices[i + 1..] {
                self.add_edge(a, b);
            }
        }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].contains(&b)
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[v].iter().copied()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for (a, adj) in self.adjacency.iter().enumerate() {
            for &b in adj.range(a + 1..) {
                edges.push((a, b));
            }
        }
        edges
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn is_edgeless(&self) -> bool {
        self.adjacency.iter().all(BTreeSet::is_empty)
    }
}

/// Greedy min-fill: repeatedly eliminates the vertex whose elimination adds
/// the fewest fill edges (ties to the smallest id). Bucket elimination
/// processes an ordering from its last position backwards, so the returned
/// ordering is the elimination sequence reversed.
pub fn min_fill_order(g: &DependencyGraph) -> Vec<usize> {
    let n = g.num_vertices();
    let mut adj = g.adjacency.clone();
    let mut eliminated = vec![false; n];
    let mut sequence = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best = None;
        let mut best_fill = usize::MAX;
        for v in (0..n).filter(|&v| !eliminated[v]) {
            let nb: Vec<usize> = adj[v].iter().copied().collect();
            let mut fill = 0;
            for (i, &a) in nb.iter().enumerate() {
                for &b in &nb[i + 1..] {
                    if !adj[a].contains(&b) {
                        fill += 1;
                    }
                }
            }
            if fill < best_fill {
                best_fill = fill;
                best = Some(v);
            }
        }
        let v = best.expect("a vertex remains");
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        for &a in &nb {
            adj[a].remove(&v);
        }
        adj[v].clear();
        eliminated[v] = true;
        sequence.push(v);
    }
    sequence.reverse();
    sequence
}

/// Processes `order` from last to first; a vertex's parents are its current
/// neighbors that come earlier in `order`, which are then connected pairwise.
/// Returns the largest parent count.
pub fn induced_width(g: &DependencyGraph, order: &[usize]) -> usize {
    let n = g.num_vertices();
    let mut position = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    let mut adj = g.adjacency.clone();
    let mut width = 0;
    for &v in order.iter().rev() {
        let parents: Vec<usize> = adj[v]
            .iter()
            .copied()
            .filter(|&u| position[u] < position[v])
            .collect();
        width = width.max(parents.len());
        for (i, &a) in parents.iter().enumerate() {
            for &b in &parents[i + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
    }
    width
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path() -> DependencyGraph {
        let mut g = DependencyGraph::new(3);
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        g
    }

    #[test]
    fn edgeless_graph_has_width_zero() {
        let g = DependencyGraph::new(3);
        assert_eq!(induced_width(&g, &min_fill_order(&g)), 0);
        assert_eq!(induced_width(&g, &[2, 0, 1]), 0);
    }

    #[test]
    fn triangle_has_width_two() {
        let mut g = DependencyGraph::new(3);
        g.add_clique(&[0, 1, 2]);
        for order in [[0, 1, 2], [2, 1, 0], [1, 0, 2]] {
            assert_eq!(induced_width(&g, &order), 2);
        }
    }

    #[test]
    fn path_widths() {
        let g = path();
        assert_eq!(induced_width(&g, &[1, 0, 2]), 1);
        assert_eq!(induced_width(&g, &min_fill_order(&g)), 1);
        // eliminating the middle first connects the endpoints
        assert_eq!(induced_width(&g, &[0, 2, 1]), 2);
    }

    #[test]
    fn star_eliminates_leaves_first() {
        let mut g = DependencyGraph::new(4);
        for leaf in 1..4 {
            g.add_edge(0, leaf);
        }
        let order = min_fill_order(&g);
        assert_eq!(induced_width(&g, &order), 1);
        assert_eq!(order.len(), 4);
    }

    #[test]
    fn ordering_is_a_permutation() {
        let mut g = DependencyGraph::new(6);
        for (a, b) in [(0, 1), (1, 2), (2, 3), (3, 0), (3, 4), (5, 1)] {
            g.add_edge(a, b);
        }
        let mut order = min_fill_order(&g);
        order.sort_unstable();
        assert_eq!(order, (0..6).collect::<Vec<_>>());
        assert_eq!(g.num_edges(), 6);
    }
}
