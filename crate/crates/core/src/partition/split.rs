//! Marking off one district by cutting a random spanning tree.

use rand::Rng;

use super::plan::{within_tolerance, PartialPlan};
use super::tree::{random_tree_within, RegionTree, TreeWorkspace, NO_PARENT};
use crate::error::{domain, Result};
use crate::rng::stream_rng;

pub const DEFAULT_ATTEMPTS: u32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSettings {
    /// Allowed relative deviation from the ideal district population.
    pub pop_tol: f64,
    /// Spanning trees tried before giving up.
    pub attempts: u32,
}

impl Default for SplitSettings {
    fn default() -> Self {
        SplitSettings {
            pop_tol: 0.0,
            attempts: DEFAULT_ATTEMPTS,
        }
    }
}

impl SplitSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.pop_tol >= 0.0 && self.pop_tol < 1.0) {
            return domain(format!("population tolerance {} outside [0, 1)", self.pop_tol));
        }
        if self.attempts == 0 {
            return domain("need at least one attempt");
        }
        Ok(())
    }
}

/// Result of one splitting call.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitOutcome<'g> {
    Split(PartialPlan<'g>),
    /// No tree among the attempts had a balanced cut.
    Bottleneck,
}

/// Which side of a tree edge becomes the new district.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutSide {
    /// The part containing the child endpoint.
    Below,
    /// The part containing the root.
    Above,
}

/// Balanced cuts of a tree over the unassigned region of `p`: the chosen
/// side must hold one district's population and the other side the
/// population of the districts still to come, each within tolerance.
pub fn balanced_cuts(
    p: &PartialPlan<'_>,
    tree: &RegionTree,
    subtree_population: &[u64],
    tol: f64,
) -> Vec<(usize, CutSide)> {
    let target = p.target();
    let rest = p.districts() - p.marked() - 1;
    let region: u64 = subtree_population[tree.root];
    let mut cuts = Vec::new();
    for &v in &tree.order[1..] {
        let below = subtree_population[v];
        let above = region - below;
        if within_tolerance(below, 1, target, tol) && within_tolerance(above, rest, target, tol) {
            cuts.push((v, CutSide::Below));
        }
        if within_tolerance(above, 1, target, tol) && within_tolerance(below, rest, target, tol) {
            cuts.push((v, CutSide::Above));
        }
    }
    cuts
}

/// Nodes on the chosen side of the cut above `v`.
pub fn cut_nodes(tree: &RegionTree, v: usize, side: CutSide) -> Vec<usize> {
    let mut below = vec![false; tree.parent.len()];
    below[v] = true;
    for &u in &tree.order {
        let par = tree.parent[u];
        if par != NO_PARENT && below[par] {
            below[u] = true;
        }
    }
    tree.order
        .iter()
        .copied()
        .filter(|&u| below[u] == (side == CutSide::Below))
        .collect()
}

/// Draws up to `attempts` spanning trees of the unassigned region and marks
/// a district at a uniformly chosen balanced cut of the first tree that has
/// one.
pub fn split_district_with<'g, R: Rng + ?Sized>(
    p: &PartialPlan<'g>,
    settings: &SplitSettings,
    ws: &mut TreeWorkspace,
    rng: &mut R,
) -> Result<SplitOutcome<'g>> {
    settings.validate()?;
    if p.level() < 2 {
        return domain("plan is already complete");
    }
    let region = p.remainder();
    let g = p.graph();
    if !g.is_connected_within(&region) {
        return Ok(SplitOutcome::Bottleneck);
    }
    for _ in 0..settings.attempts {
        let tree = random_tree_within(g, &region, ws, rng);
        let sub = tree.subtree_populations(g);
        let cuts = balanced_cuts(p, &tree, &sub, settings.pop_tol);
        if cuts.is_empty() {
            continue;
        }
        let (v, side) = cuts[rng.random_range(0..cuts.len())];
        let mut next = p.clone();
        next.mark(cut_nodes(&tree, v, side));
        return Ok(SplitOutcome::Split(next));
    }
    Ok(SplitOutcome::Bottleneck)
}

/// [`split_district_with`] on the `split` stream of `seed`.
pub fn split_district<'g>(p: &PartialPlan<'g>, settings: &SplitSettings, seed: u64) -> Result<SplitOutcome<'g>> {
    let mut ws = TreeWorkspace::new(p.graph());
    split_district_with(p, settings, &mut ws, &mut stream_rng(seed, "split", &[]))
}
