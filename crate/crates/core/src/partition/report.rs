//! District repetition across a sample of plans.

use std::collections::{BTreeMap, HashMap};

use super::plan::Plan;
use crate::diagram::DescendancyDiagram;
use crate::rng::fnv1a;

/// Hash of a district's sorted node set. Matches are confirmed by comparing
/// the sets themselves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DistrictFingerprint(pub u64);

impl DistrictFingerprint {
    pub fn of(sorted_nodes: &[usize]) -> Self {
        let bytes: Vec<u8> = sorted_nodes
            .iter()
            .flat_map(|&v| (v as u64).to_le_bytes())
            .collect();
        DistrictFingerprint(fnv1a(&bytes))
    }
}

/// Multiset of districts keyed by fingerprint with explicit collision
/// handling.
#[derive(Debug, Default, Clone)]
pub struct DistrictTally {
    buckets: HashMap<DistrictFingerprint, Vec<(Vec<usize>, usize)>>,
    total: usize,
}

impl DistrictTally {
    pub fn insert(&mut self, sorted_nodes: Vec<usize>) {
        let bucket = self.buckets.entry(DistrictFingerprint::of(&sorted_nodes)).or_default();
        match bucket.iter_mut().find(|(nodes, _)| *nodes == sorted_nodes) {
            Some((_, count)) => *count += 1,
            None => bucket.push((sorted_nodes, 1)),
        }
        self.total += 1;
    }

    pub fn counts(&self) -> impl Iterator<Item = usize> + '_ {
        self.buckets.values().flatten().map(|(_, c)| *c)
    }

    pub fn stats(&self) -> MultiplicityStats {
        let distinct = self.buckets.values().map(Vec::len).sum();
        MultiplicityStats {
            districts: self.total,
            distinct,
            average: if distinct == 0 {
                0.0
            } else {
                self.total as f64 / distinct as f64
            },
            max: self.counts().max().unwrap_or(0),
        }
    }
}

/// Repetition of one family of districts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplicityStats {
    /// District occurrences counted.
    pub districts: usize,
    /// Distinct node sets among them.
    pub distinct: usize,
    /// `districts / distinct`.
    pub average: f64,
    /// Occurrences of the most repeated district.
    pub max: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepetitionReport {
    pub plans: usize,
    pub districts_per_plan: usize,
    /// Over all `S · k` districts.
    pub all: MultiplicityStats,
    /// Over the districts drawn first (label 0) in each plan.
    pub initial: MultiplicityStats,
    /// `(multiplicity, number of distinct districts with it)`, ascending.
    pub histogram: Vec<(usize, usize)>,
    /// `A(D)` when a diagram is supplied.
    pub surviving_ancestors: Option<usize>,
    /// `G(D, j)` for `j = 1..k-1` when a diagram is supplied.
    pub common_district_counts: Vec<u32>,
}

pub fn repetition_report(plans: &[Plan], diagram: Option<&DescendancyDiagram>) -> RepetitionReport {
    let mut all = DistrictTally::default();
    let mut initial = DistrictTally::default();
    let k = plans.first().map_or(0, Plan::districts);
    for plan in plans {
        for d in 0..plan.districts() as u32 {
            let nodes = plan.district_nodes(d);
            if d == 0 {
                initial.insert(nodes.clone());
            }
            all.insert(nodes);
        }
    }
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for c in all.counts() {
        *histogram.entry(c).or_insert(0) += 1;
    }
    let (surviving_ancestors, common_district_counts) = match diagram {
        Some(d) => {
            let (_, deco) = d.decorate();
            let g = (1..d.districts())
                .map(|j| deco.common_district_count(j).expect("j in range"))
                .collect();
            (Some(deco.surviving_ancestors()), g)
        }
        None => (None, Vec::new()),
    };
    RepetitionReport {
        plans: plans.len(),
        districts_per_plan: k,
        all: all.stats(),
        initial: initial.stats(),
        histogram: histogram.into_iter().collect(),
        surviving_ancestors,
        common_district_counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(a: &[u32]) -> Plan {
        Plan::new(a.to_vec(), 2).unwrap()
    }

    #[test]
    fn identical_sample() {
        let plans = vec![plan(&[0, 0, 1, 1]); 7];
        let r = repetition_report(&plans, None);
        assert_eq!(r.all.average, 7.0);
        assert_eq!(r.all.max, 7);
        assert_eq!(r.initial.distinct, 1);
        assert_eq!(r.histogram, vec![(7, 2)]);
    }

    #[test]
    fn distinct_sample() {
        let plans = vec![plan(&[0, 0, 1, 1]), plan(&[0, 1, 1, 0]), plan(&[0, 1, 0, 1])];
        let r = repetition_report(&plans, None);
        assert_eq!(r.all.distinct, 6);
        assert_eq!(r.all.average, 1.0);
        assert_eq!(r.all.max, 1);
    }

    #[test]
    fn relabelled_districts_still_match() {
        let plans = vec![plan(&[0, 0, 1, 1]), plan(&[1, 1, 0, 0])];
        let r = repetition_report(&plans, None);
        assert_eq!(r.all.distinct, 2);
        assert_eq!(r.initial.distinct, 2);
        let d = DescendancyDiagram::chain(2, 2).unwrap();
        let r = repetition_report(&plans, Some(&d));
        assert_eq!(r.surviving_ancestors, Some(2));
        assert_eq!(r.common_district_counts, vec![1]);
    }

    #[test]
    fn fingerprint_collisions_are_separated() {
        let mut t = DistrictTally::default();
        // force two different sets into one bucket
        t.buckets.insert(DistrictFingerprint(1), vec![(vec![0], 2), (vec![1], 1)]);
        t.total = 3;
        let s = t.stats();
        assert_eq!(s.distinct, 2);
        assert_eq!(s.max, 2);
    }
}
