//! A small sequential sampler: draw first districts, then repeatedly
//! resample partial plans by weight and mark one more district.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;

use super::graph::WeightedGraph;
use super::plan::{PartialPlan, Plan};
use super::report::{repetition_report, RepetitionReport};
use super::split::{split_district_with, SplitOutcome, SplitSettings};
use super::tree::TreeWorkspace;
use super::weight::{partial_plan_weight, CutMode};
use crate::diagram::DescendancyDiagram;
use crate::error::{domain, Error, Result};
use crate::rng::stream_rng;

pub const DEFAULT_REDRAW_CAP: u32 = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct SmcConfig {
    pub districts: usize,
    pub particles: usize,
    pub rho: f64,
    pub split: SplitSettings,
    pub cut_mode: CutMode,
    /// Extra parent draws a particle may make after failed splits before the
    /// run is abandoned.
    pub redraw_cap: u32,
}

impl SmcConfig {
    pub fn new(districts: usize, particles: usize) -> Self {
        SmcConfig {
            districts,
            particles,
            rho: 1.0,
            split: SplitSettings::default(),
            cut_mode: CutMode::AllPieces,
            redraw_cap: DEFAULT_REDRAW_CAP,
        }
    }

    pub fn validate(&self, g: &WeightedGraph) -> Result<()> {
        self.split.validate()?;
        if self.districts < 2 || self.districts > g.node_count() {
            return domain(format!(
                "cannot cut {} nodes into {} districts",
                g.node_count(),
                self.districts
            ));
        }
        if self.particles == 0 {
            return domain("need at least one particle");
        }
        if !self.rho.is_finite() {
            return domain("ρ must be finite");
        }
        if !g.is_connected() {
            return domain("graph is not connected");
        }
        Ok(())
    }
}

/// Log-weights of the partial plans on one level, used to pick parents for
/// the level below.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelWeights {
    pub level: usize,
    pub log_weights: Vec<f64>,
}

impl LevelWeights {
    /// Weights scaled to sum to one.
    pub fn normalized(&self) -> Vec<f64> {
        let top = self.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = self.log_weights.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|x| x / total).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SmcRun {
    pub plans: Vec<Plan>,
    pub diagram: DescendancyDiagram,
    /// One entry per resampling step, from level `k - 1` down to 2.
    pub weights: Vec<LevelWeights>,
    pub report: RepetitionReport,
    /// Splits that failed and forced a fresh parent draw.
    pub failed_splits: u64,
}

/// Parent index drawn proportionally to `cumulative` weights.
fn draw_index<R: Rng + ?Sized>(cumulative: &[f64], rng: &mut R) -> usize {
    let u = rng.random::<f64>() * cumulative[cumulative.len() - 1];
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
}

/// Runs the sampler and returns the final plans, the resampling diagram and
/// the weights used at every level. Particle `j` of the generation filling
/// level `i` draws from stream `("smc", [i, j])`.
pub fn run_mini_smc(g: &WeightedGraph, config: &SmcConfig, seed: u64) -> Result<SmcRun> {
    config.validate(g)?;
    let k = config.districts;
    let s = config.particles;
    let empty = PartialPlan::empty(g, k)?;

    let top = k - 1;
    let first: Vec<(PartialPlan<'_>, u64)> = (0..s)
        .into_par_iter()
        .map_init(
            || TreeWorkspace::new(g),
            |ws, j| {
                let mut rng = stream_rng(seed, "smc", &[top as u64, j as u64]);
                for tries in 0..=config.redraw_cap as u64 {
                    if let SplitOutcome::Split(p) = split_district_with(&empty, &config.split, ws, &mut rng)? {
                        return Ok((p, tries));
                    }
                }
                Err(Error::Bottleneck {
                    level: top,
                    detail: format!("particle {j} found no balanced first district"),
                })
            },
        )
        .collect::<Result<_>>()?;
    let mut failed_splits: u64 = first.iter().map(|x| x.1).sum();
    let mut particles: Vec<PartialPlan<'_>> = first.into_iter().map(|x| x.0).collect();

    let mut parents_by_level: Vec<Vec<u32>> = vec![Vec::new(); k - 2];
    let mut weights = Vec::with_capacity(k - 2);
    for level in (1..top).rev() {
        let mut cache: HashMap<&[u32], f64> = HashMap::new();
        let mut log_w = Vec::with_capacity(s);
        for p in &particles {
            let w = match cache.get(p.assignment()) {
                Some(&w) => w,
                None => {
                    let w = partial_plan_weight(p, config.rho, config.cut_mode)?;
                    cache.insert(p.assignment(), w);
                    w
                }
            };
            log_w.push(w);
        }
        let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut acc = 0.0;
        let cumulative: Vec<f64> = log_w
            .iter()
            .map(|l| {
                acc += (l - max).exp();
                acc
            })
            .collect();
        let children: Vec<(PartialPlan<'_>, u32, u64)> = (0..s)
            .into_par_iter()
            .map_init(
                || TreeWorkspace::new(g),
                |ws, j| {
                    let mut rng = stream_rng(seed, "smc", &[level as u64, j as u64]);
                    for tries in 0..=config.redraw_cap as u64 {
                        let parent = draw_index(&cumulative, &mut rng);
                        if let SplitOutcome::Split(p) =
                            split_district_with(&particles[parent], &config.split, ws, &mut rng)?
                        {
                            return Ok((p, parent as u32, tries));
                        }
                    }
                    Err(Error::Bottleneck {
                        level,
                        detail: format!(
                            "particle {j} failed to extend after {} parent draws",
                            config.redraw_cap as u64 + 1
                        ),
                    })
                },
            )
            .collect::<Result<_>>()?;
        weights.push(LevelWeights {
            level: level + 1,
            log_weights: log_w,
        });
        let mut next = Vec::with_capacity(s);
        let mut parents = Vec::with_capacity(s);
        for (p, parent, tries) in children {
            next.push(p);
            parents.push(parent);
            failed_splits += tries;
        }
        parents_by_level[level - 1] = parents;
        particles = next;
    }

    let plans: Vec<Plan> = particles.iter().map(PartialPlan::to_plan).collect::<Result<_>>()?;
    let diagram = DescendancyDiagram::new(s, k, parents_by_level)?;
    let report = repetition_report(&plans, Some(&diagram));
    Ok(SmcRun {
        plans,
        diagram,
        weights,
        report,
        failed_splits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::plan::validate_plan;

    #[test]
    fn four_by_four_into_four() {
        let g = WeightedGraph::grid(4, 4).unwrap();
        let run = run_mini_smc(&g, &SmcConfig::new(4, 4), 11).unwrap();
        assert_eq!(run.plans.len(), 4);
        for plan in &run.plans {
            assert!(validate_plan(&g, plan, 0.0).is_ok());
        }
        assert_eq!(run.diagram.levels(), 3);
        assert_eq!(run.weights.len(), 2);
        assert_eq!(run.weights[0].level, 3);
        let r = &run.report;
        assert!(r.all.max as f64 >= r.all.average && r.all.average >= 1.0);
        assert!(r.initial.distinct <= r.surviving_ancestors.unwrap());
    }

    #[test]
    fn single_particle() {
        let g = WeightedGraph::grid(4, 4).unwrap();
        let run = run_mini_smc(&g, &SmcConfig::new(4, 1), 5).unwrap();
        assert_eq!(run.diagram, DescendancyDiagram::chain(1, 4).unwrap());
        assert_eq!(run.report.all.max, 1);
        assert_eq!(run.report.surviving_ancestors, Some(1));
    }

    #[test]
    fn replay_is_identical() {
        let g = WeightedGraph::grid(4, 4).unwrap();
        let mut c = SmcConfig::new(4, 12);
        c.rho = 0.5;
        let a = run_mini_smc(&g, &c, 99).unwrap();
        let b = run_mini_smc(&g, &c, 99).unwrap();
        assert_eq!(a.plans, b.plans);
        assert_eq!(a.diagram, b.diagram);
        assert_eq!(a.weights, b.weights);
        let other = run_mini_smc(&g, &c, 100).unwrap();
        assert!(a.plans != other.plans || a.diagram != other.diagram);
    }

    #[test]
    fn infeasible_instance_aborts() {
        let star = WeightedGraph::unweighted(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let mut c = SmcConfig::new(2, 3);
        c.split.attempts = 2;
        c.redraw_cap = 3;
        assert!(matches!(run_mini_smc(&star, &c, 1), Err(Error::Bottleneck { level: 1, .. })));
        let g = WeightedGraph::grid(2, 2).unwrap();
        assert!(run_mini_smc(&g, &SmcConfig::new(1, 3), 1).is_err());
        assert!(run_mini_smc(&g, &SmcConfig::new(2, 0), 1).is_err());
    }

    #[test]
    fn normalized_weights_sum_to_one() {
        let lw = LevelWeights {
            level: 2,
            log_weights: vec![-1000.0, -1001.0, -999.0],
        };
        let w = lw.normalized();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(w[2] > w[0] && w[0] > w[1]);
    }
}
