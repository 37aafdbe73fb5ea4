//! The controlled repetition sampler and a harness for its √S central limit
//! behaviour.
//!
//! A sample of size `S` holds one draw from the target repeated `⌈S^α⌉`
//! times, each at weight `1/S`, followed by a weighted sample of size
//! `S' = S - ⌈S^α⌉` from another sampler whose weights are scaled by `S'/S`.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::partition::{run_mini_smc, Plan, PlanLaw, SmcConfig, WeightedGraph};
use crate::rng::{stream_rng, StreamRng};
use crate::stats::{anderson_darling, AndersonDarling, Estimate};

/// Weighted states with weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample<T> {
    pub entries: Vec<(T, f64)>,
}

impl<T> WeightedSample<T> {
    /// Normalizes non-negative weights to sum to one.
    pub fn normalized(entries: Vec<(T, f64)>) -> Result<Self> {
        if entries.iter().any(|e| !(e.1 >= 0.0) || !e.1.is_finite()) {
            return domain("weights must be finite and non-negative");
        }
        let total: f64 = entries.iter().map(|e| e.1).sum();
        if !(total > 0.0) {
            return domain("sample has no weight");
        }
        Ok(WeightedSample {
            entries: entries.into_iter().map(|(t, w)| (t, w / total)).collect(),
        })
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn expectation<F: Fn(&T) -> f64>(&self, h: F) -> f64 {
        self.entries.iter().map(|(t, w)| w * h(t)).sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Draws single states from the target.
pub trait BaseSampler: Sync {
    type State: Clone + Send;
    fn draw(&self, rng: &mut StreamRng) -> Result<Self::State>;
}

/// Produces weighted samples of a requested size.
pub trait WeightedSampler: Sync {
    type State: Clone + Send;
    fn sample(&self, size: usize, seed: u64) -> Result<WeightedSample<Self::State>>;
}

/// A finite target with known probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteTarget<T> {
    pub states: Vec<T>,
    pub probabilities: Vec<f64>,
    cumulative: Vec<f64>,
}

impl<T> FiniteTarget<T> {
    pub fn new(states: Vec<T>, probabilities: Vec<f64>) -> Result<Self> {
        if states.is_empty() || states.len() != probabilities.len() {
            return domain("need one probability per state");
        }
        if probabilities.iter().any(|&p| !(p >= 0.0)) {
            return domain("probabilities must be non-negative");
        }
        let mut acc = 0.0;
        let cumulative: Vec<f64> = probabilities
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        if (acc - 1.0).abs() > 1e-12 {
            return domain(format!("probabilities sum to {acc}"));
        }
        Ok(FiniteTarget {
            states,
            probabilities,
            cumulative,
        })
    }

    pub fn expectation<F: Fn(&T) -> f64>(&self, h: F) -> f64 {
        self.states
            .iter()
            .zip(&self.probabilities)
            .map(|(s, p)| p * h(s))
            .sum()
    }
}

impl FiniteTarget<Plan> {
    pub fn from_law(law: &PlanLaw) -> Result<Self> {
        Self::new(law.plans.clone(), law.probabilities.clone())
    }
}

impl<T: Clone + Send + Sync> BaseSampler for FiniteTarget<T> {
    type State = T;

    /// Inverse CDF.
    fn draw(&self, rng: &mut StreamRng) -> Result<T> {
        let u = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let i = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.states.len() - 1);
        Ok(self.states[i].clone())
    }
}

/// The sequential partitioner with its output reweighted from its own
/// limiting law `proposal` to `target`, so that the weighted sample
/// estimates expectations under `target`.
#[derive(Debug, Clone)]
pub struct ReweightedSmc<'g> {
    pub graph: &'g WeightedGraph,
    pub config: SmcConfig,
    pub target: PlanLaw,
    pub proposal: PlanLaw,
}

impl WeightedSampler for ReweightedSmc<'_> {
    type State = Plan;

    fn sample(&self, size: usize, seed: u64) -> Result<WeightedSample<Plan>> {
        let mut config = self.config.clone();
        config.particles = size;
        let run = run_mini_smc(self.graph, &config, seed)?;
        let entries = run
            .plans
            .into_iter()
            .map(|p| {
                let q = self.proposal.probability(&p);
                let w = if q > 0.0 { self.target.probability(&p) / q } else { 0.0 };
                (p, w)
            })
            .collect();
        WeightedSample::normalized(entries)
    }
}

/// How many copies of the base draw a sample of size `S` holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RepeatRule {
    /// `⌈S^α⌉` with `0 < α < 1/2`.
    Power(f64),
    /// `⌈S^e⌉` for any exponent in `(0, 1)`; used for controls that break
    /// the growth condition.
    Unchecked(f64),
}

impl RepeatRule {
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 0.5) {
            return domain(format!("α = {alpha} outside (0, 1/2)"));
        }
        Ok(RepeatRule::Power(alpha))
    }

    pub fn exponent(self) -> f64 {
        match self {
            RepeatRule::Power(a) | RepeatRule::Unchecked(a) => a,
        }
    }

    pub fn validate(self) -> Result<()> {
        match self {
            RepeatRule::Power(a) => Self::power(a).map(|_| ()),
            RepeatRule::Unchecked(e) if e > 0.0 && e < 1.0 => Ok(()),
            RepeatRule::Unchecked(e) => domain(format!("exponent {e} outside (0, 1)")),
        }
    }

    /// `⌈S^e⌉`, treating values within rounding of an integer as that
    /// integer (so `⌈1000^{1/3}⌉ = 10`).
    pub fn copies(self, size: usize) -> usize {
        let x = (size as f64).powf(self.exponent());
        let r = x.round();
        let c = if (x - r).abs() <= 1e-9 * r.max(1.0) { r } else { x.ceil() };
        (c as usize).clamp(1, size)
    }
}

/// One controlled-repetition sample. The base draw uses stream
/// `("crs-base", [])` of `seed`; the weighted sampler gets a seed drawn from
/// stream `("crs-smc", [])`.
pub fn crs_sample<B, W>(base: &B, smc: &W, size: usize, rule: RepeatRule, seed: u64) -> Result<WeightedSample<B::State>>
where
    B: BaseSampler,
    W: WeightedSampler<State = B::State>,
{
    rule.validate()?;
    if size < 2 {
        return domain("sample size must be at least 2");
    }
    let copies = rule.copies(size);
    let rest = size - copies;
    let x = base.draw(&mut stream_rng(seed, "crs-base", &[]))?;
    let mut entries = Vec::with_capacity(size);
    for _ in 0..copies {
        entries.push((x.clone(), 1.0 / size as f64));
    }
    if rest > 0 {
        let inner_seed = stream_rng(seed, "crs-smc", &[]).random::<u64>();
        let inner = smc.sample(rest, inner_seed)?;
        let scale = rest as f64 / size as f64;
        entries.extend(inner.entries.into_iter().map(|(t, w)| (t, w * scale)));
    }
    Ok(WeightedSample { entries })
}

/// Summary of `Y_S = √S (E_{π_S}[h] - E_π[h])` at one sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct CltRow {
    pub size: usize,
    pub replications: usize,
    pub copies: usize,
    /// `⌈S^α⌉ / S`.
    pub repetition_fraction: f64,
    pub mean: f64,
    pub mean_stderr: f64,
    pub variance: f64,
    pub normality: Option<AndersonDarling>,
    /// Root mean square of the repeated block's share of `Y_S`,
    /// `(copies/S) √S (h(x) - E_π[h])`.
    pub repeated_block_rms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CltReport {
    pub exponent: f64,
    pub rows: Vec<CltRow>,
    /// `(size, replication, Y_S)`.
    pub raw: Vec<(usize, usize, f64)>,
}

impl CltReport {
    /// Whether `|mean(Y_S)|` never rises by more than `sigmas` combined
    /// standard errors from one size to the next.
    pub fn mean_decreasing(&self, sigmas: f64) -> bool {
        self.rows.windows(2).all(|w| {
            let slack = sigmas * (w[0].mean_stderr.powi(2) + w[1].mean_stderr.powi(2)).sqrt();
            w[1].mean.abs() <= w[0].mean.abs() + slack
        })
    }

    /// Ratio of the larger to the smaller variance among the two largest
    /// sizes.
    pub fn top_variance_ratio(&self) -> Option<f64> {
        let n = self.rows.len();
        if n < 2 {
            return None;
        }
        let (a, b) = (self.rows[n - 2].variance, self.rows[n - 1].variance);
        Some(a.max(b) / a.min(b))
    }
}

/// Runs `replications` independent controlled-repetition samples at every
/// size in `sizes`. Replication `r` at size `S` uses seed
/// `stream_rng(seed, "clt", [S, r])`.
pub fn clt_experiment<B, W, H>(
    target: &FiniteTarget<B::State>,
    base: &B,
    smc: &W,
    h: H,
    sizes: &[usize],
    rule: RepeatRule,
    replications: usize,
    seed: u64,
) -> Result<CltReport>
where
    B: BaseSampler,
    B::State: Sync,
    W: WeightedSampler<State = B::State>,
    H: Fn(&B::State) -> f64 + Sync,
{
    rule.validate()?;
    if replications == 0 || sizes.is_empty() {
        return domain("need at least one size and one replication");
    }
    let truth = target.expectation(&h);
    let mut rows = Vec::with_capacity(sizes.len());
    let mut raw = Vec::new();
    for &size in sizes {
        let copies = rule.copies(size.max(2));
        let outcomes: Vec<(f64, f64)> = (0..replications)
            .into_par_iter()
            .map(|r| {
                let rep_seed = stream_rng(seed, "clt", &[size as u64, r as u64]).random::<u64>();
                let sample = crs_sample(base, smc, size, rule, rep_seed)?;
                let root = (size as f64).sqrt();
                let y = root * (sample.expectation(&h) - truth);
                let block = copies as f64 / size as f64 * root * (h(&sample.entries[0].0) - truth);
                Ok((y, block))
            })
            .collect::<Result<_>>()?;
        let ys: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
        let est = Estimate::from_values(ys.iter().copied());
        let block_ms = outcomes.iter().map(|o| o.1 * o.1).sum::<f64>() / replications as f64;
        raw.extend(ys.iter().enumerate().map(|(r, &y)| (size, r, y)));
        rows.push(CltRow {
            size,
            replications,
            copies,
            repetition_fraction: copies as f64 / size as f64,
            mean: est.mean,
            mean_stderr: est.stderr,
            variance: est.variance(),
            normality: anderson_darling(&ys),
            repeated_block_rms: block_ms.sqrt(),
        });
    }
    Ok(CltReport {
        exponent: rule.exponent(),
        rows,
        raw,
    })
}
