//! Partial and complete district assignments.

use std::fmt;

use super::graph::WeightedGraph;
use crate::error::{domain, Result};

pub const UNASSIGNED: u32 = u32::MAX;

/// Whether `population` is within `tol · districts · target` of
/// `districts · target`. A small relative slack absorbs rounding.
pub fn within_tolerance(population: u64, districts: usize, target: f64, tol: f64) -> bool {
    let goal = districts as f64 * target;
    (population as f64 - goal).abs() <= tol * goal + 1e-9 * goal.max(1.0)
}

/// Some districts marked, the rest of the graph unassigned.
#[derive(Clone)]
pub struct PartialPlan<'g> {
    graph: &'g WeightedGraph,
    districts: usize,
    assignment: Vec<u32>,
    marked: usize,
}

impl fmt::Debug for PartialPlan<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PartialPlan")
            .field("districts", &self.districts)
            .field("marked", &self.marked)
            .field("assignment", &self.assignment)
            .finish()
    }
}

impl PartialEq for PartialPlan<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.graph, other.graph)
            && self.districts == other.districts
            && self.assignment == other.assignment
    }
}

impl<'g> PartialPlan<'g> {
    /// Nothing marked yet.
    pub fn empty(graph: &'g WeightedGraph, districts: usize) -> Result<Self> {
        if districts == 0 || districts > graph.node_count() {
            return domain(format!(
                "cannot cut {} nodes into {districts} districts",
                graph.node_count()
            ));
        }
        Ok(PartialPlan {
            graph,
            districts,
            assignment: vec![UNASSIGNED; graph.node_count()],
            marked: 0,
        })
    }

    /// Rebuilds a partial plan from labels; marked districts must be
    /// `0..m` and each non-empty.
    pub fn from_assignment(graph: &'g WeightedGraph, districts: usize, assignment: Vec<u32>) -> Result<Self> {
        let mut p = Self::empty(graph, districts)?;
        if assignment.len() != graph.node_count() {
            return domain("assignment length differs from node count");
        }
        let marked = assignment
            .iter()
            .filter(|&&d| d != UNASSIGNED)
            .map(|&d| d as usize + 1)
            .max()
            .unwrap_or(0);
        let complete = !assignment.contains(&UNASSIGNED);
        if marked > districts || (complete && marked != districts) || (!complete && marked + 1 >= districts) {
            return domain("labels do not describe a partial plan");
        }
        for d in 0..marked as u32 {
            if !assignment.contains(&d) {
                return domain(format!("district {d} is empty"));
            }
        }
        p.assignment = assignment;
        // a complete plan took k - 1 splits
        p.marked = if complete { districts - 1 } else { marked };
        Ok(p)
    }

    pub fn graph(&self) -> &'g WeightedGraph {
        self.graph
    }

    pub fn districts(&self) -> usize {
        self.districts
    }

    /// Number of districts marked off so far.
    pub fn marked(&self) -> usize {
        self.marked
    }

    /// Diagram level, `k - m`.
    pub fn level(&self) -> usize {
        self.districts - self.marked
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    /// Population each district should carry.
    pub fn target(&self) -> f64 {
        self.graph.total_population() as f64 / self.districts as f64
    }

    pub fn remainder(&self) -> Vec<usize> {
        self.nodes_labelled(UNASSIGNED)
    }

    pub fn district_nodes(&self, district: u32) -> Vec<usize> {
        self.nodes_labelled(district)
    }

    fn nodes_labelled(&self, label: u32) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&v| self.assignment[v] == label)
            .collect()
    }

    /// Marks `nodes` (all currently unassigned) as the next district. When
    /// one district is left afterwards the remainder becomes it.
    pub(crate) fn mark(&mut self, nodes: impl IntoIterator<Item = usize>) {
        let label = self.marked as u32;
        for v in nodes {
            debug_assert_eq!(self.assignment[v], UNASSIGNED);
            self.assignment[v] = label;
        }
        self.marked += 1;
        if self.marked == self.districts - 1 {
            let last = (self.districts - 1) as u32;
            for a in &mut self.assignment {
                if *a == UNASSIGNED {
                    *a = last;
                }
            }
        }
    }

    /// Every node carries a district label.
    pub fn is_complete(&self) -> bool {
        !self.assignment.contains(&UNASSIGNED)
    }

    pub fn to_plan(&self) -> Result<Plan> {
        if !self.is_complete() {
            return domain("partial plan still has unassigned nodes");
        }
        Ok(Plan {
            assignment: self.assignment.clone(),
            districts: self.districts,
        })
    }
}

/// A complete assignment of every node to one of `k` districts. Labels
/// follow the order in which districts were drawn.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Plan {
    assignment: Vec<u32>,
    districts: usize,
}

impl Plan {
    pub fn new(assignment: Vec<u32>, districts: usize) -> Result<Self> {
        if let Some(&bad) = assignment.iter().find(|&&d| d as usize >= districts) {
            return domain(format!("label {bad} outside 0..{districts}"));
        }
        Ok(Plan {
            assignment,
            districts,
        })
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn districts(&self) -> usize {
        self.districts
    }

    pub fn district_nodes(&self, district: u32) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&v| self.assignment[v] == district)
            .collect()
    }

    /// Same partition with districts relabelled by their lowest node.
    pub fn canonical(&self) -> Plan {
        let mut map = vec![u32::MAX; self.districts];
        let mut next = 0;
        let assignment = self
            .assignment
            .iter()
            .map(|&d| {
                if map[d as usize] == u32::MAX {
                    map[d as usize] = next;
                    next += 1;
                }
                map[d as usize]
            })
            .collect();
        Plan {
            assignment,
            districts: self.districts,
        }
    }
}

/// Why a plan failed validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanViolation {
    Length { expected: usize, found: usize },
    EmptyDistrict(u32),
    Disconnected(u32),
    Population { district: u32, population: u64 },
}

/// Checks a complete plan from scratch: every label in range, every district
/// non-empty, connected (union-find over internal edges) and within `tol` of
/// the ideal population.
pub fn validate_plan(g: &WeightedGraph, plan: &Plan, tol: f64) -> std::result::Result<(), PlanViolation> {
    let n = g.node_count();
    if plan.assignment.len() != n {
        return Err(PlanViolation::Length {
            expected: n,
            found: plan.assignment.len(),
        });
    }
    let k = plan.districts;
    let mut root: Vec<usize> = (0..n).collect();
    fn find(root: &mut [usize], mut v: usize) -> usize {
        while root[v] != v {
            root[v] = root[root[v]];
            v = root[v];
        }
        v
    }
    for &(u, v) in g.edges() {
        if plan.assignment[u] == plan.assignment[v] {
            let (a, b) = (find(&mut root, u), find(&mut root, v));
            root[a] = b;
        }
    }
    let mut pops = vec![0u64; k];
    let mut component = vec![usize::MAX; k];
    for v in 0..n {
        let d = plan.assignment[v] as usize;
        pops[d] += g.population(v);
        let r = find(&mut root, v);
        if component[d] == usize::MAX {
            component[d] = r;
        } else if component[d] != r {
            return Err(PlanViolation::Disconnected(d as u32));
        }
    }
    let target = g.total_population() as f64 / k as f64;
    if let Some(d) = component.iter().position(|&c| c == usize::MAX) {
        return Err(PlanViolation::EmptyDistrict(d as u32));
    }
    for d in 0..k {
        if !within_tolerance(pops[d], 1, target, tol) {
            return Err(PlanViolation::Population {
                district: d as u32,
                population: pops[d],
            });
        }
    }
    Ok(())
}
