//! Uniform spanning trees by loop-erased random walks (Wilson's algorithm).

use rand::Rng;

use super::graph::WeightedGraph;
use crate::error::{domain, Result};
use crate::rng::stream_rng;

pub const NO_PARENT: usize = usize::MAX;

/// A spanning tree of an induced subgraph, rooted at the region's first node.
#[derive(Debug, Clone)]
pub struct RegionTree {
    pub root: usize,
    /// Indexed by graph node; `NO_PARENT` for the root and nodes outside.
    pub parent: Vec<usize>,
    /// Region nodes with every parent listed before its children.
    pub order: Vec<usize>,
}

impl RegionTree {
    /// Tree edges `(child, parent)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.order[1..].iter().map(|&v| (v, self.parent[v]))
    }

    /// Population below each node (inclusive), indexed by graph node.
    pub fn subtree_populations(&self, g: &WeightedGraph) -> Vec<u64> {
        let mut sub = vec![0u64; self.parent.len()];
        for &v in self.order.iter().rev() {
            sub[v] += g.population(v);
            if self.parent[v] != NO_PARENT {
                sub[self.parent[v]] += sub[v];
            }
        }
        sub
    }
}

/// Scratch space reused across draws on the same graph.
#[derive(Debug, Clone)]
pub struct TreeWorkspace {
    in_tree: Vec<bool>,
    next: Vec<usize>,
    inside: Vec<bool>,
    children: Vec<Vec<usize>>,
    buffer: Vec<usize>,
}

impl TreeWorkspace {
    pub fn new(g: &WeightedGraph) -> Self {
        let n = g.node_count();
        TreeWorkspace {
            in_tree: vec![false; n],
            next: vec![NO_PARENT; n],
            inside: vec![false; n],
            children: vec![Vec::new(); n],
            buffer: Vec::new(),
        }
    }
}

/// Uniform spanning tree of the subgraph induced by `nodes`, which must be
/// non-empty and connected.
pub fn random_tree_within<R: Rng + ?Sized>(
    g: &WeightedGraph,
    nodes: &[usize],
    ws: &mut TreeWorkspace,
    rng: &mut R,
) -> RegionTree {
    debug_assert!(g.is_connected_within(nodes));
    for &v in nodes {
        ws.inside[v] = true;
        ws.in_tree[v] = false;
        ws.next[v] = NO_PARENT;
    }
    let root = nodes[0];
    ws.in_tree[root] = true;
    for &start in nodes {
        let mut u = start;
        while !ws.in_tree[u] {
            ws.buffer.clear();
            ws.buffer
                .extend(g.neighbors(u).iter().copied().filter(|&w| ws.inside[w]));
            let step = ws.buffer[rng.random_range(0..ws.buffer.len())];
            ws.next[u] = step;
            u = step;
        }
        let mut u = start;
        while !ws.in_tree[u] {
            ws.in_tree[u] = true;
            u = ws.next[u];
        }
    }
    let mut parent = vec![NO_PARENT; g.node_count()];
    for &v in nodes {
        if v != root {
            parent[v] = ws.next[v];
            ws.children[ws.next[v]].push(v);
        }
    }
    let mut order = Vec::with_capacity(nodes.len());
    order.push(root);
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        order.extend(ws.children[v].iter().copied());
    }
    for &v in nodes {
        ws.inside[v] = false;
        ws.children[v].clear();
    }
    RegionTree {
        root,
        parent,
        order,
    }
}

/// Uniform spanning tree of `g` as a sorted edge list, using the generator
/// stream of `seed`.
pub fn random_spanning_tree(g: &WeightedGraph, seed: u64) -> Result<Vec<(usize, usize)>> {
    random_spanning_tree_with(g, &mut stream_rng(seed, "spanning-tree", &[]))
}

pub fn random_spanning_tree_with<R: Rng + ?Sized>(
    g: &WeightedGraph,
    rng: &mut R,
) -> Result<Vec<(usize, usize)>> {
    if !g.is_connected() {
        return domain("cannot draw a spanning tree of a disconnected graph");
    }
    let nodes: Vec<usize> = (0..g.node_count()).collect();
    let mut ws = TreeWorkspace::new(g);
    let tree = random_tree_within(g, &nodes, &mut ws, rng);
    let mut edges: Vec<_> = tree.edges().map(|(a, b)| (a.min(b), a.max(b))).collect();
    edges.sort_unstable();
    Ok(edges)
}
