//! Spanning-tree counts through the reduced Laplacian.

use nalgebra::DMatrix;
use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};

use super::graph::WeightedGraph;

/// Largest node count for which the exact count is also computed.
pub const EXACT_NODE_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct TreeCount {
    /// Natural log of the count; `-inf` for a disconnected graph.
    pub log: f64,
    /// Exact count when the graph has at most [`EXACT_NODE_LIMIT`] nodes.
    pub exact: Option<BigUint>,
}

/// `τ(g)`.
pub fn spanning_tree_count(g: &WeightedGraph) -> TreeCount {
    let nodes: Vec<usize> = (0..g.node_count()).collect();
    TreeCount {
        log: log_tree_count_within(g, &nodes),
        exact: (nodes.len() <= EXACT_NODE_LIMIT).then(|| exact_tree_count_within(g, &nodes)),
    }
}

/// Index of each node of `nodes` in the reduced Laplacian; the first node is
/// the one dropped.
fn local_indices(g: &WeightedGraph, nodes: &[usize]) -> Vec<usize> {
    let mut local = vec![usize::MAX; g.node_count()];
    for (i, &v) in nodes.iter().enumerate().skip(1) {
        local[v] = i - 1;
    }
    local
}

fn membership(g: &WeightedGraph, nodes: &[usize]) -> Vec<bool> {
    let mut inside = vec![false; g.node_count()];
    for &v in nodes {
        inside[v] = true;
    }
    inside
}

/// Log spanning-tree count of the subgraph induced by `nodes`.
pub fn log_tree_count_within(g: &WeightedGraph, nodes: &[usize]) -> f64 {
    if nodes.is_empty() || !g.is_connected_within(nodes) {
        return f64::NEG_INFINITY;
    }
    let n = nodes.len() - 1;
    if n == 0 {
        return 0.0;
    }
    let local = local_indices(g, nodes);
    let inside = membership(g, nodes);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for &v in nodes {
        for &w in g.neighbors(v) {
            if !inside[w] {
                continue;
            }
            if local[v] != usize::MAX {
                m[(local[v], local[v])] += 1.0;
                if local[w] != usize::MAX {
                    m[(local[v], local[w])] -= 1.0;
                }
            }
        }
    }
    match m.cholesky() {
        Some(ch) => 2.0 * ch.l().diagonal().iter().map(|x| x.ln()).sum::<f64>(),
        None => f64::NEG_INFINITY,
    }
}

/// Exact spanning-tree count of the subgraph induced by `nodes`, by
/// fraction-free elimination.
pub fn exact_tree_count_within(g: &WeightedGraph, nodes: &[usize]) -> BigUint {
    if nodes.is_empty() || !g.is_connected_within(nodes) {
        return BigUint::zero();
    }
    let n = nodes.len() - 1;
    let local = local_indices(g, nodes);
    let inside = membership(g, nodes);
    let mut m = vec![vec![BigInt::zero(); n]; n];
    for &v in nodes {
        if local[v] == usize::MAX {
            continue;
        }
        for &w in g.neighbors(v) {
            if inside[w] {
                m[local[v]][local[v]] += 1;
                if local[w] != usize::MAX {
                    m[local[v]][local[w]] -= 1;
                }
            }
        }
    }
    let det = bareiss_determinant(m);
    debug_assert!(!det.is_negative());
    det.magnitude().clone()
}

fn bareiss_determinant(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::from(1);
    }
    let mut negate = false;
    let mut prev = BigInt::from(1);
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}
