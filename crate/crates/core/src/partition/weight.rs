//! Resampling weights of partial plans.

use super::count::log_tree_count_within;
use super::plan::{PartialPlan, UNASSIGNED};
use crate::error::{domain, Result};

/// Which edges count toward the cut size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CutMode {
    /// Edges joining any two different pieces, the unassigned remainder
    /// counting as one piece.
    #[default]
    AllPieces,
    /// Edges joining two different marked districts.
    MarkedOnly,
}

impl CutMode {
    pub fn label(self) -> &'static str {
        match self {
            CutMode::AllPieces => "all-pieces",
            CutMode::MarkedOnly => "marked-only",
        }
    }
}

pub fn cut_edge_count(p: &PartialPlan<'_>, mode: CutMode) -> usize {
    let a = p.assignment();
    p.graph()
        .edges()
        .iter()
        .filter(|&&(u, v)| {
            a[u] != a[v] && (mode == CutMode::AllPieces || (a[u] != UNASSIGNED && a[v] != UNASSIGNED))
        })
        .count()
}

/// Sum of log spanning-tree counts over the marked districts and the
/// remainder.
pub fn log_tree_product(p: &PartialPlan<'_>) -> f64 {
    let g = p.graph();
    let mut total = 0.0;
    let mut labels: Vec<u32> = (0..p.marked() as u32).collect();
    if p.is_complete() {
        labels.push(p.districts() as u32 - 1);
    } else {
        labels.push(UNASSIGNED);
    }
    for label in labels {
        let nodes: Vec<usize> = (0..g.node_count()).filter(|&v| p.assignment()[v] == label).collect();
        if !nodes.is_empty() {
            total += log_tree_count_within(g, &nodes);
        }
    }
    total
}

/// `log w = (ρ - 1) · log τ - log |∂|`.
pub fn partial_plan_weight(p: &PartialPlan<'_>, rho: f64, mode: CutMode) -> Result<f64> {
    if !rho.is_finite() {
        return domain("ρ must be finite");
    }
    let cut = cut_edge_count(p, mode);
    if cut == 0 {
        return domain("partial plan has no cut edges");
    }
    let tree_term = if rho == 1.0 {
        0.0
    } else {
        (rho - 1.0) * log_tree_product(p)
    };
    Ok(tree_term - (cut as f64).ln())
}
