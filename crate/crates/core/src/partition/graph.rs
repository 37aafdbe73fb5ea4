//! Node-weighted undirected simple graphs.

use std::collections::VecDeque;

use crate::error::{domain, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedGraph {
    adjacency: Vec<Vec<usize>>,
    populations: Vec<u64>,
    edges: Vec<(usize, usize)>,
}

impl WeightedGraph {
    /// Builds a graph on nodes `0..n`. Edges are undirected and stored with
    /// the smaller endpoint first; self-loops, repeated edges and
    /// non-positive populations are rejected. Connectivity is not required
    /// here; see [`WeightedGraph::require_connected`].
    pub fn new(n: usize, edges: &[(usize, usize)], populations: Vec<u64>) -> Result<Self> {
        if n == 0 {
            return domain("graph needs at least one node");
        }
        if populations.len() != n {
            return domain(format!("{} populations for {n} nodes", populations.len()));
        }
        if let Some(i) = populations.iter().position(|&p| p == 0) {
            return domain(format!("node {i} has zero population"));
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut normalized = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n || v >= n {
                return domain(format!("edge ({u}, {v}) references a node outside 0..{n}"));
            }
            if u == v {
                return domain(format!("self-loop at node {u}"));
            }
            let e = (u.min(v), u.max(v));
            if adjacency[e.0].contains(&e.1) {
                return domain(format!("repeated edge ({}, {})", e.0, e.1));
            }
            adjacency[e.0].push(e.1);
            adjacency[e.1].push(e.0);
            normalized.push(e);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        normalized.sort_unstable();
        Ok(WeightedGraph {
            adjacency,
            populations,
            edges: normalized,
        })
    }

    /// Unit-population graph.
    pub fn unweighted(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::new(n, edges, vec![1; n])
    }

    /// `rows × cols` grid with rook adjacency; node `r * cols + c`.
    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return domain("grid dimensions must be positive");
        }
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    edges.push((v, v + 1));
                }
                if r + 1 < rows {
                    edges.push((v, v + cols));
                }
            }
        }
        Self::unweighted(rows * cols, &edges)
    }

    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Self::unweighted(n, &edges)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return domain("a cycle needs at least 3 nodes");
        }
        let mut edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        edges.push((n - 1, 0));
        Self::unweighted(n, &edges)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Self::unweighted(n, &edges)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn population(&self, v: usize) -> u64 {
        self.populations[v]
    }

    pub fn populations(&self) -> &[u64] {
        &self.populations
    }

    pub fn total_population(&self) -> u64 {
        self.populations.iter().sum()
    }

    pub fn is_connected(&self) -> bool {
        let all: Vec<usize> = (0..self.node_count()).collect();
        self.is_connected_within(&all)
    }

    pub fn require_connected(self) -> Result<Self> {
        if self.is_connected() {
            Ok(self)
        } else {
            domain("graph is not connected")
        }
    }

    /// Whether the subgraph induced by `nodes` is connected. An empty set
    /// counts as disconnected.
    pub fn is_connected_within(&self, nodes: &[usize]) -> bool {
        let Some(&start) = nodes.first() else {
            return false;
        };
        let mut inside = vec![false; self.node_count()];
        for &v in nodes {
            inside[v] = true;
        }
        let mut seen = vec![false; self.node_count()];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &w in &self.adjacency[u] {
                if inside[w] && !seen[w] {
                    seen[w] = true;
                    reached += 1;
                    queue.push_back(w);
                }
            }
        }
        reached == nodes.len()
    }

    /// Subgraph induced by `nodes` (in the given order), relabelled
    /// `0..nodes.len()`.
    pub fn induced(&self, nodes: &[usize]) -> Result<WeightedGraph> {
        let mut local = vec![usize::MAX; self.node_count()];
        for (i, &v) in nodes.iter().enumerate() {
            if v >= self.node_count() || local[v] != usize::MAX {
                return domain(format!("bad or repeated node {v} in induced subgraph"));
            }
            local[v] = i;
        }
        let edges: Vec<_> = self
            .edges
            .iter()
            .filter(|&&(u, v)| local[u] != usize::MAX && local[v] != usize::MAX)
            .map(|&(u, v)| (local[u], local[v]))
            .collect();
        let pops = nodes.iter().map(|&v| self.populations[v]).collect();
        WeightedGraph::new(nodes.len(), &edges, pops)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builders() {
        let g = WeightedGraph::grid(3, 3).unwrap();
        assert_eq!(g.node_count(), 9);
        assert_eq!(g.edge_count(), 12);
        assert_eq!(g.neighbors(4), &[1, 3, 5, 7]);
        assert!(g.is_connected());
        assert_eq!(WeightedGraph::complete(4).unwrap().edge_count(), 6);
        assert_eq!(WeightedGraph::cycle(4).unwrap().edge_count(), 4);
        assert_eq!(WeightedGraph::path(1).unwrap().edge_count(), 0);
        assert!(WeightedGraph::cycle(2).is_err());
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(WeightedGraph::unweighted(0, &[]).is_err());
        assert!(WeightedGraph::unweighted(2, &[(0, 0)]).is_err());
        assert!(WeightedGraph::unweighted(2, &[(0, 1), (1, 0)]).is_err());
        assert!(WeightedGraph::unweighted(2, &[(0, 2)]).is_err());
        assert!(WeightedGraph::new(2, &[(0, 1)], vec![1, 0]).is_err());
        assert!(WeightedGraph::new(2, &[(0, 1)], vec![1]).is_err());
        let split = WeightedGraph::unweighted(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(!split.is_connected());
        assert!(split.require_connected().is_err());
    }

    #[test]
    fn induced_subgraph_keeps_internal_edges() {
        let g = WeightedGraph::grid(3, 3).unwrap();
        let sub = g.induced(&[0, 1, 3, 4]).unwrap();
        assert_eq!(sub.edge_count(), 4);
        assert!(sub.is_connected());
        assert!(!g.is_connected_within(&[0, 2]));
        assert!(!g.is_connected_within(&[]));
        assert!(g.induced(&[0, 0]).is_err());
    }
}
