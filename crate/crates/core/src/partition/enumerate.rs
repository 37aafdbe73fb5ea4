//! Exhaustive enumerations for small graphs: balanced partitions, spanning
//! trees, the law of one splitting step, and the limiting law of the
//! sequential sampler's output.

use std::collections::BTreeMap;

use super::graph::WeightedGraph;
use super::plan::{within_tolerance, PartialPlan, Plan};
use super::split::SplitSettings;
use super::weight::{partial_plan_weight, CutMode};
use crate::error::{domain, Error, Result};

/// Node limit for [`enumerate_balanced_partitions`].
pub const MAX_ENUMERATION_NODES: usize = 20;
/// Limit on the number of edge subsets examined by
/// [`enumerate_spanning_trees_within`].
pub const MAX_TREE_SUBSETS: u128 = 5_000_000;

fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All connected `k`-partitions whose districts lie within `tol` of the
/// ideal population, each listed once with canonical labels, sorted.
pub fn enumerate_balanced_partitions(g: &WeightedGraph, k: usize, tol: f64) -> Result<Vec<Plan>> {
    let n = g.node_count();
    if n > MAX_ENUMERATION_NODES {
        return Err(Error::TooLarge(format!(
            "{n} nodes exceeds the enumeration limit of {MAX_ENUMERATION_NODES}"
        )));
    }
    if k == 0 || k > n {
        return domain(format!("cannot cut {n} nodes into {k} districts"));
    }
    let nbr: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w))
        .collect();
    let target = g.total_population() as f64 / k as f64;
    let mut search = PartitionSearch {
        g,
        nbr,
        target,
        tol,
        labels: vec![0; n],
        plans: Vec::new(),
    };
    search.recurse((1u32 << n) - 1, 0, k);
    let mut plans = search.plans;
    plans.sort();
    Ok(plans)
}

struct PartitionSearch<'a> {
    g: &'a WeightedGraph,
    nbr: Vec<u32>,
    target: f64,
    tol: f64,
    labels: Vec<u32>,
    plans: Vec<Plan>,
}

impl PartitionSearch<'_> {
    fn population(&self, mask: u32) -> u64 {
        bits(mask).map(|v| self.g.population(v)).sum()
    }

    fn connected(&self, mask: u32) -> bool {
        if mask == 0 {
            return false;
        }
        let mut seen = 1u32 << mask.trailing_zeros();
        loop {
            let grown = bits(seen).fold(seen, |m, v| m | (self.nbr[v] & mask));
            if grown == seen {
                return seen == mask;
            }
            seen = grown;
        }
    }

    fn recurse(&mut self, remaining: u32, label: u32, left: usize) {
        if left == 1 {
            if self.connected(remaining) && within_tolerance(self.population(remaining), 1, self.target, self.tol) {
                for v in bits(remaining) {
                    self.labels[v] = label;
                }
                self.plans.push(Plan::new(self.labels.clone(), label as usize + 1).expect("labels in range"));
            }
            return;
        }
        let v = remaining.trailing_zeros() as usize;
        let upper = (1.0 + self.tol) * self.target + 1e-9 * self.target;
        let mut districts = Vec::new();
        self.grow(1 << v, self.nbr[v] & remaining, 0, remaining, upper, &mut districts);
        for d in districts {
            let rest = remaining & !d;
            if !within_tolerance(self.population(d), 1, self.target, self.tol)
                || !within_tolerance(self.population(rest), left - 1, self.target, self.tol)
            {
                continue;
            }
            for u in bits(d) {
                self.labels[u] = label;
            }
            self.recurse(rest, label + 1, left - 1);
        }
    }

    /// Connected supersets of `set` inside `allowed`, extended only through
    /// `candidates` and never through `forbidden`; each is produced once.
    fn grow(&self, set: u32, candidates: u32, forbidden: u32, allowed: u32, upper: f64, out: &mut Vec<u32>) {
        if self.population(set) as f64 > upper {
            return;
        }
        out.push(set);
        let mut cand = candidates;
        let mut forb = forbidden;
        while cand != 0 {
            let u = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            let next = set | 1 << u;
            let ext = cand | (self.nbr[u] & allowed & !next & !forb & !candidates);
            self.grow(next, ext, forb, allowed, upper, out);
            forb |= 1 << u;
        }
    }
}

fn bits(mask: u32) -> impl Iterator<Item = usize> {
    let mut m = mask;
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(v)
        }
    })
}

fn find(root: &mut [usize], mut v: usize) -> usize {
    while root[v] != v {
        root[v] = root[root[v]];
        v = root[v];
    }
    v
}

/// Every spanning tree of the subgraph induced by `nodes`, found by testing
/// each `(n - 1)`-subset of its edges for acyclicity.
pub fn enumerate_spanning_trees_within(g: &WeightedGraph, nodes: &[usize]) -> Result<Vec<Vec<(usize, usize)>>> {
    let mut inside = vec![false; g.node_count()];
    for &v in nodes {
        inside[v] = true;
    }
    let edges: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .copied()
        .filter(|&(u, v)| inside[u] && inside[v])
        .collect();
    let need = nodes.len().saturating_sub(1);
    let subsets = binomial(edges.len(), need);
    if subsets > MAX_TREE_SUBSETS {
        return Err(Error::TooLarge(format!("tree enumeration needs {subsets} edge subsets")));
    }
    let mut trees = Vec::new();
    let mut chosen = Vec::with_capacity(need);
    choose(&edges, 0, need, &mut chosen, &mut |subset| {
        let mut root: Vec<usize> = (0..g.node_count()).collect();
        for &(u, v) in subset {
            let (a, b) = (find(&mut root, u), find(&mut root, v));
            if a == b {
                return;
            }
            root[a] = b;
        }
        trees.push(subset.to_vec());
    });
    Ok(trees)
}

fn choose<F: FnMut(&[(usize, usize)])>(
    edges: &[(usize, usize)],
    start: usize,
    need: usize,
    chosen: &mut Vec<(usize, usize)>,
    visit: &mut F,
) {
    if chosen.len() == need {
        visit(chosen);
        return;
    }
    let missing = need - chosen.len();
    for i in start..=edges.len().saturating_sub(missing) {
        if i >= edges.len() {
            break;
        }
        chosen.push(edges[i]);
        choose(edges, i + 1, need, chosen, visit);
        chosen.pop();
    }
}

/// Law of one splitting step from a fixed partial plan.
#[derive(Debug, Clone, PartialEq)]
pub struct CutLaw {
    /// Resulting assignments with probabilities conditional on success.
    pub outcomes: BTreeMap<Vec<u32>, f64>,
    /// Fraction of spanning trees of the remainder with a balanced cut.
    pub tree_success: f64,
}

impl CutLaw {
    /// Chance that some tree among `attempts` draws has a balanced cut.
    pub fn success_within(&self, attempts: u32) -> f64 {
        if self.tree_success >= 1.0 {
            1.0
        } else {
            -(attempts as f64 * (-self.tree_success).ln_1p()).exp_m1()
        }
    }
}

/// Exact law of [`split_district`](super::split::split_district) from `p`,
/// averaging over every spanning tree of the remainder.
pub fn tree_cut_law(p: &PartialPlan<'_>, tol: f64) -> Result<CutLaw> {
    if p.level() < 2 {
        return domain("plan is already complete");
    }
    let g = p.graph();
    let region = p.remainder();
    let trees = enumerate_spanning_trees_within(g, &region)?;
    let target = p.target();
    let rest = p.districts() - p.marked() - 1;
    let mut outcomes: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    let mut successes = 0usize;
    for tree in &trees {
        let mut sides: Vec<Vec<usize>> = Vec::new();
        for skip in 0..tree.len() {
            let mut root: Vec<usize> = (0..g.node_count()).collect();
            for (i, &(u, v)) in tree.iter().enumerate() {
                if i != skip {
                    let (a, b) = (find(&mut root, u), find(&mut root, v));
                    root[a] = b;
                }
            }
            let anchor = find(&mut root, tree[skip].0);
            let (one, other): (Vec<usize>, Vec<usize>) =
                region.iter().partition(|&&v| find(&mut root, v) == anchor);
            for (side, rest_side) in [(&one, &other), (&other, &one)] {
                let pop: u64 = side.iter().map(|&v| g.population(v)).sum();
                let rest_pop: u64 = rest_side.iter().map(|&v| g.population(v)).sum();
                if within_tolerance(pop, 1, target, tol) && within_tolerance(rest_pop, rest, target, tol) {
                    sides.push(side.clone());
                }
            }
        }
        if sides.is_empty() {
            continue;
        }
        successes += 1;
        let share = 1.0 / sides.len() as f64;
        for side in sides {
            let mut next = p.clone();
            next.mark(side);
            *outcomes.entry(next.assignment().to_vec()).or_insert(0.0) += share;
        }
    }
    if successes > 0 {
        for v in outcomes.values_mut() {
            *v /= successes as f64;
        }
    }
    Ok(CutLaw {
        outcomes,
        tree_success: if trees.is_empty() {
            0.0
        } else {
            successes as f64 / trees.len() as f64
        },
    })
}

/// A probability law over canonical plans.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanLaw {
    pub plans: Vec<Plan>,
    pub probabilities: Vec<f64>,
}

impl PlanLaw {
    /// Equal mass on each plan; plans are canonicalized.
    pub fn uniform(plans: &[Plan]) -> Result<Self> {
        if plans.is_empty() {
            return domain("no plans to put a law on");
        }
        let p = 1.0 / plans.len() as f64;
        Self::from_masses(plans.iter().map(|q| (q.canonical(), p)))
    }

    fn from_masses(masses: impl IntoIterator<Item = (Plan, f64)>) -> Result<Self> {
        let mut merged: BTreeMap<Plan, f64> = BTreeMap::new();
        for (plan, m) in masses {
            *merged.entry(plan).or_insert(0.0) += m;
        }
        let total: f64 = merged.values().sum();
        if !(total > 0.0) {
            return domain("law has no mass");
        }
        let (plans, probabilities) = merged.into_iter().map(|(p, m)| (p, m / total)).unzip();
        Ok(PlanLaw { plans, probabilities })
    }

    /// Mass of the partition `plan`, whatever its labels.
    pub fn probability(&self, plan: &Plan) -> f64 {
        let c = plan.canonical();
        self.plans
            .binary_search(&c)
            .map_or(0.0, |i| self.probabilities[i])
    }

    pub fn index_of(&self, plan: &Plan) -> Option<usize> {
        self.plans.binary_search(&plan.canonical()).ok()
    }

    pub fn len(&self) -> usize {
        self.plans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plans.is_empty()
    }
}

/// Large-population limit of the output law of the sequential sampler: the
/// first district is drawn by [`tree_cut_law`]; each later generation
/// reweights partial plans by their weight times their chance of splitting
/// within `attempts` trees, then splits again.
pub fn limiting_smc_law(
    g: &WeightedGraph,
    k: usize,
    rho: f64,
    settings: &SplitSettings,
    mode: CutMode,
) -> Result<PlanLaw> {
    settings.validate()?;
    if k < 2 {
        return domain("need at least 2 districts");
    }
    let first = tree_cut_law(&PartialPlan::empty(g, k)?, settings.pop_tol)?;
    if first.outcomes.is_empty() {
        return Err(Error::Bottleneck {
            level: k - 1,
            detail: "no balanced first district exists".into(),
        });
    }
    let mut generation = first.outcomes;
    for step in 2..k {
        let mut staged = Vec::with_capacity(generation.len());
        for (assignment, mass) in &generation {
            let p = PartialPlan::from_assignment(g, k, assignment.clone())?;
            let log_w = partial_plan_weight(&p, rho, mode)?;
            let law = tree_cut_law(&p, settings.pop_tol)?;
            staged.push((*mass, log_w, law));
        }
        let top = staged
            .iter()
            .map(|s| s.1)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut next: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        let mut total = 0.0;
        for (mass, log_w, law) in &staged {
            let parent = mass * (log_w - top).exp() * law.success_within(settings.attempts);
            total += parent;
            for (child, q) in &law.outcomes {
                *next.entry(child.clone()).or_insert(0.0) += parent * q;
            }
        }
        if !(total > 0.0) {
            return Err(Error::Bottleneck {
                level: k - step,
                detail: "every partial plan is a bottleneck".into(),
            });
        }
        for v in next.values_mut() {
            *v /= total;
        }
        generation = next;
    }
    PlanLaw::from_masses(
        generation
            .into_iter()
            .map(|(a, m)| (Plan::new(a, k).expect("labels in range").canonical(), m)),
    )
}
