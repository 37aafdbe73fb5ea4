//! Descendancy diagrams: who resampled from whom, level by level.
//!
//! Levels are numbered from the bottom: level 1 holds the `S` complete plans
//! and level `k - 1` the partial plans with a single district drawn. Each node
//! on levels `1..=k-2` points to its parent one level up. A node is active if
//! some bottom node descends from it; the active nodes on the top level are
//! the surviving ancestors.

use rand::distr::{Distribution, Uniform};
use rand::Rng;
use rayon::prelude::*;

use crate::analytic::ProbabilityVector;
use crate::error::{domain, Result};
use crate::rng::stream_rng;
use crate::stats::Estimate;

/// Parent-selection probabilities for every level.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSchedule {
    Uniform,
    /// One node per level is `ratio` times as likely as each other node.
    Spike(f64),
    /// Explicit vectors; entry `i` is used by children on level `i + 1`
    /// choosing parents on level `i + 2`.
    PerLevel(Vec<ProbabilityVector>),
}

impl WeightSchedule {
    /// Short label used in CSV output, e.g. `uniform` or `spike:100`.
    pub fn label(&self) -> String {
        match self {
            WeightSchedule::Uniform => "uniform".to_string(),
            WeightSchedule::Spike(r) => format!("spike:{r}"),
            WeightSchedule::PerLevel(_) => "per-level".to_string(),
        }
    }

    /// Sampler for the parents of children on `level` (1-based).
    pub fn level_sampler(&self, width: usize, level: usize) -> Result<LevelSampler> {
        match self {
            WeightSchedule::Uniform => Ok(LevelSampler::Uniform(Uniform::new(0, width as u32).map_err(
                |e| crate::Error::Domain(format!("width {width}: {e}")),
            )?)),
            WeightSchedule::Spike(ratio) => {
                if !(*ratio > 0.0) || !ratio.is_finite() {
                    return domain("spike ratio must be positive and finite");
                }
                if width == 1 {
                    return Ok(LevelSampler::Constant);
                }
                let p_spike = ratio / (ratio + (width - 1) as f64);
                Ok(LevelSampler::Spike {
                    p_spike,
                    rest: Uniform::new(1, width as u32).expect("width >= 2"),
                })
            }
            WeightSchedule::PerLevel(vectors) => {
                let p = vectors.get(level - 1).ok_or_else(|| {
                    crate::Error::Domain(format!(
                        "schedule has {} levels, level {level} requested",
                        vectors.len()
                    ))
                })?;
                if p.len() != width {
                    return domain(format!(
                        "schedule vector for level {level} has {} entries, width is {width}",
                        p.len()
                    ));
                }
                Ok(LevelSampler::table(p))
            }
        }
    }
}

/// Draws a parent index for one level.
#[derive(Debug, Clone)]
pub enum LevelSampler {
    Constant,
    Uniform(Uniform<u32>),
    Spike { p_spike: f64, rest: Uniform<u32> },
    /// Inverse CDF over cumulative probabilities.
    Table(Vec<f64>),
}

impl LevelSampler {
    fn table(p: &ProbabilityVector) -> Self {
        let mut acc = 0.0;
        let cdf = p
            .as_slice()
            .iter()
            .map(|x| {
                acc += x;
                acc
            })
            .collect();
        LevelSampler::Table(cdf)
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match self {
            LevelSampler::Constant => 0,
            LevelSampler::Uniform(u) => u.sample(rng),
            LevelSampler::Spike { p_spike, rest } => {
                if rng.random::<f64>() < *p_spike {
                    0
                } else {
                    rest.sample(rng)
                }
            }
            LevelSampler::Table(cdf) => {
                let u = rng.random::<f64>() * cdf[cdf.len() - 1];
                let idx = cdf.partition_point(|&c| c <= u);
                // skip zero-probability tail entries reached through rounding
                let mut idx = idx.min(cdf.len() - 1);
                while idx > 0 && cdf[idx] == cdf[idx - 1] {
                    idx -= 1;
                }
                idx as u32
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DescendancyDiagram {
    width: usize,
    districts: usize,
    parents: Vec<Vec<u32>>,
}

impl DescendancyDiagram {
    /// `parents[i - 1][j]` is the parent (on level `i + 1`) of node `j` on
    /// level `i`, for `i` in `1..=k-2`.
    pub fn new(width: usize, districts: usize, parents: Vec<Vec<u32>>) -> Result<Self> {
        if width == 0 {
            return domain("diagram width must be at least 1");
        }
        if districts < 2 {
            return domain("a diagram needs at least 2 districts");
        }
        if parents.len() != districts - 2 {
            return domain(format!(
                "expected {} parent levels for k={districts}, got {}",
                districts - 2,
                parents.len()
            ));
        }
        for (i, level) in parents.iter().enumerate() {
            if level.len() != width {
                return domain(format!("level {} has {} entries, width is {width}", i + 1, level.len()));
            }
            if let Some(bad) = level.iter().find(|&&p| p as usize >= width) {
                return domain(format!("parent index {bad} on level {} out of range", i + 1));
            }
        }
        Ok(DescendancyDiagram {
            width,
            districts,
            parents,
        })
    }

    /// Every node's parent is the node with the same index.
    pub fn identity(width: usize, districts: usize) -> Result<Self> {
        let row: Vec<u32> = (0..width as u32).collect();
        Self::new(width, districts, vec![row; districts.saturating_sub(2)])
    }

    /// Every node's parent is node 0.
    pub fn chain(width: usize, districts: usize) -> Result<Self> {
        Self::new(width, districts, vec![vec![0; width]; districts.saturating_sub(2)])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn districts(&self) -> usize {
        self.districts
    }

    /// Number of levels, `k - 1`.
    pub fn levels(&self) -> usize {
        self.districts - 1
    }

    pub fn parents(&self) -> &[Vec<u32>] {
        &self.parents
    }

    /// Parent on level `level + 1` of `node` on `level` (1-based level).
    pub fn parent(&self, level: usize, node: usize) -> u32 {
        self.parents[level - 1][node]
    }

    pub fn decorate(&self) -> (ActiveProfile, DescendantDecoration) {
        let decoration = DescendantDecoration::compute(self);
        let profile = ActiveProfile::from_decoration(&decoration);
        (profile, decoration)
    }

    /// `A(D)`.
    pub fn surviving_ancestors(&self) -> usize {
        DescendantDecoration::compute(self).surviving_ancestors()
    }
}

/// Bottom-level descendant counts `d(i, j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescendantDecoration {
    width: usize,
    counts: Vec<Vec<u32>>,
}

impl DescendantDecoration {
    fn compute(d: &DescendancyDiagram) -> Self {
        let mut counts = Vec::with_capacity(d.levels());
        counts.push(vec![1u32; d.width]);
        for level in &d.parents {
            let below = counts.last().expect("bottom level present");
            let mut above = vec![0u32; d.width];
            for (child, &parent) in level.iter().enumerate() {
                above[parent as usize] += below[child];
            }
            counts.push(above);
        }
        DescendantDecoration {
            width: d.width,
            counts,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn levels(&self) -> usize {
        self.counts.len()
    }

    /// `d(level, node)` with 1-based level.
    pub fn get(&self, level: usize, node: usize) -> u32 {
        self.counts[level - 1][node]
    }

    pub fn level(&self, level: usize) -> &[u32] {
        &self.counts[level - 1]
    }

    pub fn max_on_level(&self, level: usize) -> u32 {
        self.counts[level - 1].iter().copied().max().unwrap_or(0)
    }

    pub fn surviving_ancestors(&self) -> usize {
        self.counts
            .last()
            .map_or(0, |top| top.iter().filter(|&&c| c > 0).count())
    }

    /// `F(D, φ)`: the lowest level holding a node whose descendant count
    /// passes `φ·S` under `threshold`, or `None` if no level does.
    pub fn mega_ancestor_level(&self, phi: f64, threshold: Threshold) -> Result<Option<usize>> {
        check_share(phi)?;
        let bar = phi * self.width as f64;
        Ok((1..=self.levels()).find(|&i| threshold.passes(self.max_on_level(i), bar)))
    }

    /// `G(D, j)`: the largest number of final plans sharing the `j` districts
    /// drawn first, read off level `k - j`.
    pub fn common_district_count(&self, j: usize) -> Result<u32> {
        let k = self.levels() + 1;
        if j == 0 || j > k - 1 {
            return domain(format!("j={j} outside 1..={}", k - 1));
        }
        Ok(self.max_on_level(k - j))
    }
}

/// Active counts `X_1..X_{k-1}` and membership per level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveProfile {
    pub counts: Vec<usize>,
    pub active: Vec<Vec<bool>>,
}

impl ActiveProfile {
    fn from_decoration(d: &DescendantDecoration) -> Self {
        let active: Vec<Vec<bool>> = d
            .counts
            .iter()
            .map(|level| level.iter().map(|&c| c > 0).collect())
            .collect();
        let counts = active.iter().map(|l| l.iter().filter(|&&a| a).count()).collect();
        ActiveProfile { counts, active }
    }

    /// `X_i`, 1-based.
    pub fn count(&self, level: usize) -> usize {
        self.counts[level - 1]
    }
}

/// How a descendant count is compared with `φ·S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threshold {
    /// `d > φS`.
    Exceeds,
    /// `d >= φS`. This is the reading under which a share of 1 (a single
    /// ancestor of every final plan) is attainable.
    AtLeast,
}

impl Threshold {
    fn passes(self, count: u32, bar: f64) -> bool {
        match self {
            Threshold::Exceeds => count as f64 > bar,
            Threshold::AtLeast => count as f64 >= bar,
        }
    }
}

fn check_share(phi: f64) -> Result<()> {
    if !(phi > 0.0 && phi <= 1.0) {
        return domain(format!("share {phi} outside (0, 1]"));
    }
    Ok(())
}

/// Samples a `k`-district diagram of width `S` with parents drawn from `w`.
pub fn sample_diagram_with<R: Rng + ?Sized>(
    width: usize,
    districts: usize,
    w: &WeightSchedule,
    rng: &mut R,
) -> Result<DescendancyDiagram> {
    if width == 0 || districts < 2 {
        return domain("need width >= 1 and at least 2 districts");
    }
    if let WeightSchedule::PerLevel(v) = w {
        if v.len() != districts - 2 {
            return domain(format!(
                "schedule has {} levels, diagram needs {}",
                v.len(),
                districts - 2
            ));
        }
    }
    let mut parents = Vec::with_capacity(districts - 2);
    for level in 1..=districts - 2 {
        let sampler = w.level_sampler(width, level)?;
        parents.push((0..width).map(|_| sampler.draw(rng)).collect());
    }
    Ok(DescendancyDiagram {
        width,
        districts,
        parents,
    })
}

/// Samples a diagram from the `diagram` stream of `seed`.
pub fn sample_diagram(
    width: usize,
    districts: usize,
    w: &WeightSchedule,
    seed: u64,
) -> Result<DescendancyDiagram> {
    sample_diagram_with(width, districts, w, &mut stream_rng(seed, "diagram", &[]))
}

/// Per-trial diagram used by the estimators: stream `("diagram-trial",
/// [width, trial])`.
pub fn trial_diagram(
    width: usize,
    districts: usize,
    w: &WeightSchedule,
    seed: u64,
    trial: u64,
) -> Result<DescendancyDiagram> {
    let mut rng = stream_rng(seed, "diagram-trial", &[width as u64, trial]);
    sample_diagram_with(width, districts, w, &mut rng)
}

/// Monte Carlo estimate of `A(S, k)` under `w`.
pub fn estimate_expected_ancestors(
    width: usize,
    districts: usize,
    w: &WeightSchedule,
    trials: usize,
    seed: u64,
) -> Result<Estimate> {
    let profile = estimate_ancestor_profile(width, districts, w, trials, seed)?;
    Ok(*profile.last().expect("at least k = 2"))
}

/// Estimates of `A(S, k')` for every `k'` in `2..=k`, all read off the same
/// `k`-district diagrams: the lower `k' - 1` levels of a `k`-district diagram
/// form a `k'`-district diagram.
pub fn estimate_ancestor_profile(
    width: usize,
    districts: usize,
    w: &WeightSchedule,
    trials: usize,
    seed: u64,
) -> Result<Vec<Estimate>> {
    let per_trial = ancestor_profile_trials(width, districts, w, trials, seed)?;
    Ok((0..districts - 1)
        .map(|level| Estimate::from_values(per_trial.iter().map(|c| c[level] as f64)))
        .collect())
}

/// Active counts on levels `1..=k-1` of each trial diagram, in trial order.
pub fn ancestor_profile_trials(
    width: usize,
    districts: usize,
    w: &WeightSchedule,
    trials: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    if trials == 0 {
        return domain("need at least one trial");
    }
    (0..trials as u64)
        .into_par_iter()
        .map(|t| trial_diagram(width, districts, w, seed, t).map(|d| d.decorate().0.counts))
        .collect()
}

/// Per-trial statistics of one sampled diagram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialSummary {
    /// Active counts on levels `1..=k-1`; the last is `A(D)`.
    pub active: Vec<usize>,
    /// `F(D, φ)` for each requested share.
    pub mega_levels: Vec<Option<usize>>,
    /// `G(D, j)` for `j = 1..=k-1`.
    pub common: Vec<u32>,
}

/// Summaries of the same trial diagrams as [`ancestor_profile_trials`].
pub fn trial_summaries(
    width: usize,
    districts: usize,
    w: &WeightSchedule,
    shares: &[f64],
    threshold: Threshold,
    trials: usize,
    seed: u64,
) -> Result<Vec<TrialSummary>> {
    if trials == 0 {
        return domain("need at least one trial");
    }
    for &phi in shares {
        check_share(phi)?;
    }
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let d = trial_diagram(width, districts, w, seed, t)?;
            let (profile, deco) = d.decorate();
            Ok(TrialSummary {
                active: profile.counts,
                mega_levels: shares
                    .iter()
                    .map(|&phi| deco.mega_ancestor_level(phi, threshold))
                    .collect::<Result<_>>()?,
                common: (1..districts)
                    .map(|j| deco.common_district_count(j))
                    .collect::<Result<_>>()?,
            })
        })
        .collect()
}

/// Active lineages of a diagram grown upward one level at a time. Only the
/// descendant counts of active nodes are kept, so the cost per level is the
/// number of active nodes rather than the width.
#[derive(Debug, Clone)]
pub struct ActiveLineages {
    width: usize,
    level: usize,
    counts: Vec<u32>,
    scratch: Vec<u32>,
    touched: Vec<u32>,
}

impl ActiveLineages {
    pub fn new(width: usize) -> Self {
        ActiveLineages {
            width,
            level: 1,
            counts: vec![1; width],
            scratch: vec![0; width],
            touched: Vec::new(),
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Descendant counts of the active nodes on the current level.
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn active(&self) -> usize {
        self.counts.len()
    }

    pub fn max_count(&self) -> u32 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Moves up one level, each active node choosing a parent from `sampler`.
    pub fn step<R: Rng + ?Sized>(&mut self, sampler: &LevelSampler, rng: &mut R) {
        self.touched.clear();
        for &c in &self.counts {
            let p = sampler.draw(rng);
            let slot = &mut self.scratch[p as usize];
            if *slot == 0 {
                self.touched.push(p);
            }
            *slot += c;
        }
        self.counts.clear();
        for &p in &self.touched {
            self.counts.push(self.scratch[p as usize]);
            self.scratch[p as usize] = 0;
        }
        self.level += 1;
        debug_assert!(self.counts.len() <= self.width);
    }
}

/// One cell of a mega-ancestor table.
#[derive(Debug, Clone, PartialEq)]
pub struct MegaAncestorCell {
    pub width: usize,
    pub share: f64,
    pub trials: usize,
    /// Trials in which some level reached the share.
    pub found: usize,
    /// Mean of `F(D, φ)` over those trials.
    pub level: Option<Estimate>,
    /// `φS <= 1`: every bottom node already qualifies.
    pub vacuous: bool,
}

impl MegaAncestorCell {
    pub fn occurrence_rate(&self) -> f64 {
        self.found as f64 / self.trials as f64
    }
}

/// Settings for [`f_table`].
#[derive(Debug, Clone)]
pub struct MegaAncestorSettings {
    pub threshold: Threshold,
    /// Height limit of the diagram; `None` grows it until every share is
    /// reached (full coalescence at the latest).
    pub max_levels: Option<usize>,
}

impl Default for MegaAncestorSettings {
    fn default() -> Self {
        MegaAncestorSettings {
            threshold: Threshold::AtLeast,
            max_levels: None,
        }
    }
}

/// Levels at which each share in `shares` is first reached in one trial.
pub fn mega_ancestor_levels<R: Rng + ?Sized>(
    width: usize,
    shares: &[f64],
    w: &WeightSchedule,
    settings: &MegaAncestorSettings,
    rng: &mut R,
) -> Result<Vec<Option<usize>>> {
    for &phi in shares {
        check_share(phi)?;
    }
    let bars: Vec<f64> = shares.iter().map(|p| p * width as f64).collect();
    let mut found: Vec<Option<usize>> = vec![None; shares.len()];
    let mut lineages = ActiveLineages::new(width);
    // With unbounded height every share is reached once all lineages merge;
    // this ceiling only guards against pathological schedules.
    let ceiling = settings
        .max_levels
        .unwrap_or_else(|| 1_000 * width.max(1) + 1_000);
    loop {
        let max = lineages.max_count();
        for (slot, &bar) in found.iter_mut().zip(&bars) {
            if slot.is_none() && settings.threshold.passes(max, bar) {
                *slot = Some(lineages.level());
            }
        }
        if found.iter().all(Option::is_some) || lineages.level() >= ceiling {
            break;
        }
        if lineages.active() == 1 && settings.max_levels.is_none() {
            // single ancestor: nothing further can change
            break;
        }
        let sampler = w.level_sampler(width, lineages.level())?;
        lineages.step(&sampler, rng);
    }
    Ok(found)
}

/// Mean `F(D, φ)` over `trials` diagrams for every `(S, φ)` pair, with the
/// fraction of trials where the share was reached.
pub fn f_table(
    widths: &[usize],
    shares: &[f64],
    w: &WeightSchedule,
    trials: usize,
    seed: u64,
    settings: &MegaAncestorSettings,
) -> Result<Vec<MegaAncestorCell>> {
    if trials == 0 {
        return domain("need at least one trial");
    }
    let mut cells = Vec::new();
    for &width in widths {
        if width == 0 {
            return domain("width must be at least 1");
        }
        let runs: Vec<Vec<Option<usize>>> = (0..trials as u64)
            .into_par_iter()
            .map(|t| {
                let mut rng = stream_rng(seed, "mega-ancestor", &[width as u64, t]);
                mega_ancestor_levels(width, shares, w, settings, &mut rng)
            })
            .collect::<Result<_>>()?;
        for (col, &share) in shares.iter().enumerate() {
            let levels: Vec<f64> = runs.iter().filter_map(|r| r[col]).map(|l| l as f64).collect();
            cells.push(MegaAncestorCell {
                width,
                share,
                trials,
                found: levels.len(),
                level: (!levels.is_empty()).then(|| Estimate::from_values(levels.iter().copied())),
                vacuous: share * width as f64 <= 1.0,
            });
        }
    }
    Ok(cells)
}

/// Monte Carlo `A(S, S)` for each `S`, by growing active lineages `S - 2`
/// levels. `S <= 2` returns `S` exactly.
pub fn square_diagram_experiment(widths: &[usize], trials: usize, seed: u64) -> Result<Vec<(usize, Estimate)>> {
    if trials == 0 {
        return domain("need at least one trial");
    }
    widths
        .iter()
        .map(|&width| {
            if width == 0 {
                return domain("width must be at least 1");
            }
            let sampler = WeightSchedule::Uniform.level_sampler(width, 1)?;
            let values: Vec<f64> = (0..trials as u64)
                .into_par_iter()
                .map(|t| {
                    let mut rng = stream_rng(seed, "square", &[width as u64, t]);
                    let mut lineages = ActiveLineages::new(width);
                    for _ in 0..width.saturating_sub(2) {
                        lineages.step(&sampler, &mut rng);
                    }
                    lineages.active() as f64
                })
                .collect();
            Ok((width, Estimate::from_values(values)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn width_one_collapses_to_one_ancestor() {
        for k in 2..8 {
            let d = sample_diagram(1, k, &WeightSchedule::Uniform, 9).unwrap();
            assert!(d.parents().iter().all(|l| l == &vec![0]));
            assert_eq!(d.surviving_ancestors(), 1);
        }
    }

    #[test]
    fn seeded_diagram_is_reproducible() {
        let a = sample_diagram(4, 4, &WeightSchedule::Uniform, 2024).unwrap();
        let b = sample_diagram(4, 4, &WeightSchedule::Uniform, 2024).unwrap();
        assert_eq!(a, b);
        assert!((1..=4).contains(&a.surviving_ancestors()));
    }

    #[test]
    fn invalid_diagrams_are_rejected() {
        assert!(DescendancyDiagram::new(0, 3, vec![vec![]]).is_err());
        assert!(DescendancyDiagram::new(2, 1, vec![]).is_err());
        assert!(DescendancyDiagram::new(2, 4, vec![vec![0, 1]]).is_err());
        assert!(DescendancyDiagram::new(2, 3, vec![vec![0, 2]]).is_err());
        assert!(DescendancyDiagram::new(2, 3, vec![vec![0]]).is_err());
        let sched = WeightSchedule::PerLevel(vec![ProbabilityVector::uniform(3)]);
        assert!(sample_diagram(3, 5, &sched, 1).is_err());
        let sched = WeightSchedule::PerLevel(vec![ProbabilityVector::uniform(2)]);
        assert!(sample_diagram(3, 3, &sched, 1).is_err());
        assert!(sample_diagram(3, 3, &WeightSchedule::Spike(-1.0), 1).is_err());
    }

    #[test]
    fn chain_and_identity_decorations() {
        let chain = DescendancyDiagram::chain(5, 6).unwrap();
        let (profile, deco) = chain.decorate();
        assert_eq!(profile.counts, vec![5, 1, 1, 1, 1]);
        assert_eq!(deco.get(5, 0), 5);
        assert_eq!(chain.surviving_ancestors(), 1);
        for j in 1..=4 {
            assert_eq!(deco.common_district_count(j).unwrap(), 5);
        }
        assert_eq!(deco.common_district_count(5).unwrap(), 1);

        let id = DescendancyDiagram::identity(5, 6).unwrap();
        let (profile, deco) = id.decorate();
        assert!(profile.counts.iter().all(|&c| c == 5));
        assert!((1..=5).all(|l| deco.level(l).iter().all(|&d| d == 1)));
        assert_eq!(id.surviving_ancestors(), 5);
        for j in 1..=5 {
            assert_eq!(deco.common_district_count(j).unwrap(), 1);
        }
        assert!(deco.common_district_count(0).is_err());
        assert!(deco.common_district_count(6).is_err());
    }

    #[test]
    fn mega_ancestor_on_chain() {
        let (_, deco) = DescendancyDiagram::chain(8, 5).unwrap().decorate();
        // φS < 1: the bottom level qualifies
        assert_eq!(deco.mega_ancestor_level(0.1, Threshold::Exceeds).unwrap(), Some(1));
        // φS >= 1: the chain collapses at level 2
        assert_eq!(deco.mega_ancestor_level(0.125, Threshold::Exceeds).unwrap(), Some(2));
        assert_eq!(deco.mega_ancestor_level(0.5, Threshold::Exceeds).unwrap(), Some(2));
        assert_eq!(deco.mega_ancestor_level(1.0, Threshold::Exceeds).unwrap(), None);
        assert_eq!(deco.mega_ancestor_level(1.0, Threshold::AtLeast).unwrap(), Some(2));
        // integer φS separates the two readings
        assert_eq!(deco.mega_ancestor_level(0.125, Threshold::AtLeast).unwrap(), Some(1));
        assert!(deco.mega_ancestor_level(0.0, Threshold::AtLeast).is_err());
        assert!(deco.mega_ancestor_level(1.5, Threshold::AtLeast).is_err());
    }

    #[test]
    fn table_sampler_skips_zero_mass() {
        let p = ProbabilityVector::new(vec![0.0, 0.5, 0.0, 0.5, 0.0]).unwrap();
        let s = LevelSampler::table(&p);
        let mut rng = stream_rng(1, "t", &[]);
        let mut seen = [0u32; 5];
        for _ in 0..10_000 {
            seen[s.draw(&mut rng) as usize] += 1;
        }
        assert_eq!(seen[0] + seen[2] + seen[4], 0);
        assert!(seen[1] > 4500 && seen[3] > 4500);
    }

    #[test]
    fn square_experiment_small_sizes_are_exact() {
        let res = square_diagram_experiment(&[1, 2], 50, 3).unwrap();
        assert_eq!(res[0].1.mean, 1.0);
        assert_eq!(res[1].1.mean, 2.0);
        assert_eq!(res[1].1.stderr, 0.0);
    }

    #[test]
    fn lineages_match_full_diagram_counts() {
        // Same law, different bookkeeping: compare A(S, k) means.
        let trials = 20_000;
        let full = estimate_expected_ancestors(6, 6, &WeightSchedule::Uniform, trials, 5).unwrap();
        let sampler = WeightSchedule::Uniform.level_sampler(6, 1).unwrap();
        let lazy = Estimate::from_values((0..trials as u64).map(|t| {
            let mut rng = stream_rng(5, "lazy", &[t]);
            let mut l = ActiveLineages::new(6);
            for _ in 0..4 {
                l.step(&sampler, &mut rng);
            }
            l.active() as f64
        }));
        let se = (full.stderr.powi(2) + lazy.stderr.powi(2)).sqrt();
        assert!((full.mean - lazy.mean).abs() < 4.0 * se, "{full:?} {lazy:?}");
    }

    #[test]
    fn trial_summaries_match_profiles() {
        let w = WeightSchedule::Spike(10.0);
        let profiles = ancestor_profile_trials(8, 6, &w, 50, 3).unwrap();
        let summaries = trial_summaries(8, 6, &w, &[0.5, 1.0], Threshold::AtLeast, 50, 3).unwrap();
        for (p, s) in profiles.iter().zip(&summaries) {
            assert_eq!(&s.active, p);
            assert_eq!(s.common.len(), 5);
            assert_eq!(s.common[4], 1);
            assert!(s.common.windows(2).all(|w| w[0] >= w[1]));
            assert_eq!(s.mega_levels.len(), 2);
        }
        assert!(trial_summaries(8, 6, &w, &[1.5], Threshold::AtLeast, 5, 3).is_err());
    }

    proptest! {
        #[test]
        fn sampled_diagram_invariants(width in 1usize..12, k in 2usize..12, seed in any::<u64>(), spike in prop::bool::ANY) {
            let w = if spike { WeightSchedule::Spike(25.0) } else { WeightSchedule::Uniform };
            let d = sample_diagram(width, k, &w, seed).unwrap();
            let (profile, deco) = d.decorate();
            prop_assert_eq!(profile.counts[0], width);
            for pair in profile.counts.windows(2) {
                prop_assert!(pair[1] <= pair[0] && pair[1] >= 1);
            }
            for level in 1..=deco.levels() {
                prop_assert_eq!(deco.level(level).iter().map(|&c| c as usize).sum::<usize>(), width);
                for (node, &c) in deco.level(level).iter().enumerate() {
                    prop_assert_eq!(c > 0, profile.active[level - 1][node]);
                }
            }
            prop_assert_eq!(d.surviving_ancestors(), *profile.counts.last().unwrap());
            let g: Vec<u32> = (1..k).map(|j| deco.common_district_count(j).unwrap()).collect();
            for pair in g.windows(2) {
                prop_assert!(pair[1] <= pair[0]);
            }
            let mut last = 0;
            for phi in [0.05, 0.2, 0.5, 0.75, 1.0] {
                let strict = deco.mega_ancestor_level(phi, Threshold::Exceeds).unwrap().unwrap_or(usize::MAX);
                let f = deco.mega_ancestor_level(phi, Threshold::AtLeast).unwrap().unwrap_or(usize::MAX);
                prop_assert!(f >= last);
                prop_assert!(strict >= f);
                last = f;
            }
        }
    }
}
