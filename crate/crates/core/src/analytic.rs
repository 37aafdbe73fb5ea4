//! Exact and recursive surviving-ancestor expectations for uniform
//! descendancy diagrams.
//!
//! With `t` active nodes on one level and `S` nodes per level, the number of
//! distinct parents chosen on the level above follows the classical occupancy
//! law. Iterating that law gives an absorbing chain on active counts whose
//! state after `k - 2` steps is the number of surviving ancestors of a
//! `k`-district diagram.
//!
//! Exact values use big rationals. The one-step law is available both as the
//! inclusion–exclusion sum ([`one_step_pmf`]) and through the positive
//! occupancy recurrence used to build [`TransitionMatrix`]; the two routes are
//! checked against each other in the tests.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{domain, Error, Result};
use crate::stats::compensated_sum;

pub type Rational = BigRational;

/// Largest sample size (and district count) for which
/// [`expected_ancestors`] stays in exact arithmetic.
pub const EXACT_LIMIT: usize = 60;

/// Default cap for [`a_limit_iterations`].
pub const DEFAULT_ITERATION_CAP: u64 = 10_000_000;

fn check_sizes(t: usize, s: usize) -> Result<()> {
    if s == 0 {
        return domain("sample size must be at least 1");
    }
    if t == 0 || t > s {
        return domain(format!("active count {t} outside 1..={s}"));
    }
    Ok(())
}

fn big(n: usize) -> BigInt {
    BigInt::from(n)
}

fn binomial(n: usize, r: usize) -> BigInt {
    if r > n {
        return BigInt::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigInt::one();
    for i in 0..r {
        acc = acc * big(n - i) / big(i + 1);
    }
    acc
}

/// Expected number of distinct parents chosen by `t` active nodes,
/// `S - S(1 - 1/S)^t`, exactly.
pub fn one_step_expectation(t: usize, s: usize) -> Result<Rational> {
    check_sizes(t, s)?;
    let sb = big(s);
    let st = num_traits::pow(sb.clone(), t);
    let miss = num_traits::pow(big(s - 1), t);
    // S - S (S-1)^t / S^t = (S^{t+1} - S (S-1)^t) / S^t
    Ok(Rational::new(&sb * &st - &sb * miss, st))
}

/// Floating-point counterpart of [`one_step_expectation`].
pub fn one_step_expectation_f64(t: f64, s: usize) -> f64 {
    let s = s as f64;
    -s * (t * (-1.0 / s).ln_1p()).exp_m1()
}

/// Probability that `t` active nodes choose exactly `v` distinct parents,
/// by inclusion–exclusion: `C(S,v) Σ_i (-1)^{v-i} C(v,i) (i/S)^t`.
///
/// Returns zero for `v > t`.
pub fn one_step_pmf(v: usize, t: usize, s: usize) -> Result<Rational> {
    check_sizes(t, s)?;
    if v == 0 || v > s {
        return domain(format!("parent count {v} outside 1..={s}"));
    }
    if v > t {
        return Ok(Rational::zero());
    }
    let mut alternating = BigInt::zero();
    for i in 0..=v {
        let term = binomial(v, i) * num_traits::pow(big(i), t);
        if (v - i) % 2 == 0 {
            alternating += term;
        } else {
            alternating -= term;
        }
    }
    Ok(Rational::new(
        binomial(s, v) * alternating,
        num_traits::pow(big(s), t),
    ))
}

/// Number of maps from `t` children onto `S` parents whose image has exactly
/// `v` elements, for every `1 <= v <= t <= S`. Row `t - 1`, column `v - 1`.
fn image_size_counts(s: usize) -> Vec<Vec<BigUint>> {
    let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(s);
    let mut first = vec![BigUint::zero(); s];
    first[0] = BigUint::from(s);
    rows.push(first);
    for t in 2..=s {
        let prev = &rows[t - 2];
        let mut row = vec![BigUint::zero(); s];
        for v in 1..=t {
            let mut c = &prev[v - 1] * BigUint::from(v);
            if v >= 2 {
                c += &prev[v - 2] * BigUint::from(s - v + 1);
            }
            row[v - 1] = c;
        }
        rows.push(row);
    }
    rows
}

/// Lower-triangular transition matrix of the active-count chain.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    size: usize,
    entries: Vec<Vec<Rational>>,
}

impl TransitionMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    /// Probability of moving from `t` active nodes to `v` (both 1-based).
    pub fn get(&self, t: usize, v: usize) -> &Rational {
        &self.entries[t - 1][v - 1]
    }

    /// Row `t` (1-based) as a slice indexed by `v - 1`.
    pub fn row(&self, t: usize) -> &[Rational] {
        &self.entries[t - 1]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Rational]> {
        self.entries.iter().map(Vec::as_slice)
    }
}

impl fmt::Display for TransitionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.entries {
            let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
            writeln!(f, "{}", cells.join("\t"))?;
        }
        Ok(())
    }
}

/// Exact transition matrix for sample size `S`, built from the occupancy
/// recurrence (all terms positive).
pub fn transition_matrix(s: usize) -> Result<TransitionMatrix> {
    if s == 0 {
        return domain("sample size must be at least 1");
    }
    let counts = image_size_counts(s);
    let mut denom = BigInt::one();
    let mut entries = Vec::with_capacity(s);
    for row in counts {
        denom *= big(s);
        entries.push(
            row.into_iter()
                .map(|c| Rational::new(BigInt::from(c), denom.clone()))
                .collect(),
        );
    }
    Ok(TransitionMatrix { size: s, entries })
}

/// Floating-point transition matrix via the same positive recurrence,
/// usable for any `S` without cancellation.
pub fn transition_matrix_f64(s: usize) -> Result<Vec<Vec<f64>>> {
    if s == 0 {
        return domain("sample size must be at least 1");
    }
    let sf = s as f64;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(s);
    let mut first = vec![0.0; s];
    first[0] = 1.0;
    rows.push(first);
    for t in 2..=s {
        let prev = &rows[t - 2];
        let mut row = vec![0.0; s];
        for v in 1..=t {
            let mut p = prev[v - 1] * (v as f64 / sf);
            if v >= 2 {
                p += prev[v - 2] * ((s - v + 1) as f64 / sf);
            }
            row[v - 1] = p;
        }
        rows.push(row);
    }
    Ok(rows)
}

fn check_districts(s: usize, k: usize) -> Result<()> {
    if s == 0 {
        return domain("sample size must be at least 1");
    }
    if k < 2 {
        return domain(format!("district count {k} must be at least 2"));
    }
    Ok(())
}

/// Exact distribution of the active count on the top level of a `k`-district
/// diagram, indexed by `v - 1`.
pub fn top_level_distribution(s: usize, k: usize) -> Result<Vec<Rational>> {
    check_districts(s, k)?;
    // Entry (t, v) is counts[t][v] / S^t; rescale every row to the common
    // denominator S^S so each step is pure integer arithmetic.
    let counts = image_size_counts(s);
    let scale: Vec<BigUint> = (1..=s)
        .map(|t| num_traits::pow(BigUint::from(s), s - t))
        .collect();
    let kernel: Vec<Vec<BigUint>> = counts
        .into_iter()
        .zip(&scale)
        .map(|(row, sc)| row.into_iter().map(|c| c * sc).collect())
        .collect();
    let step_denom = num_traits::pow(BigUint::from(s), s);

    let mut numer = vec![BigUint::zero(); s];
    numer[s - 1] = BigUint::one();
    let mut denom = BigUint::one();
    for _ in 0..k - 2 {
        let mut next = vec![BigUint::zero(); s];
        for (t, mass) in numer.iter().enumerate() {
            if mass.is_zero() {
                continue;
            }
            for (v, w) in kernel[t][..=t].iter().enumerate() {
                next[v] += mass * w;
            }
        }
        numer = next;
        denom *= &step_denom;
        // Keep the integers small by stripping the common factor.
        let g = numer.iter().fold(denom.clone(), |g, n| g.gcd(n));
        if !g.is_one() {
            for n in numer.iter_mut() {
                *n /= &g;
            }
            denom /= &g;
        }
    }
    let denom = BigInt::from(denom);
    Ok(numer
        .into_iter()
        .map(|n| Rational::new(BigInt::from(n), denom.clone()))
        .collect())
}

/// Exact expected number of surviving ancestors `A(S, k)`.
///
/// `k = 2` is the single-level diagram, so `A(S, 2) = S`.
pub fn expected_ancestors_exact(s: usize, k: usize) -> Result<Rational> {
    let dist = top_level_distribution(s, k)?;
    Ok(dist
        .iter()
        .enumerate()
        .fold(Rational::zero(), |acc, (i, p)| acc + p * big(i + 1)))
}

/// Floating-point `A(S, k)` for any size, by compensated vector–matrix
/// products.
pub fn expected_ancestors_f64(s: usize, k: usize) -> Result<f64> {
    check_districts(s, k)?;
    let m = transition_matrix_f64(s)?;
    let mut dist = vec![0.0; s];
    dist[s - 1] = 1.0;
    for _ in 0..k - 2 {
        let next: Vec<f64> = (0..s)
            .map(|v| compensated_sum((v..s).map(|t| dist[t] * m[t][v])))
            .collect();
        dist = next;
    }
    Ok(compensated_sum(
        dist.iter().enumerate().map(|(i, p)| p * (i + 1) as f64),
    ))
}

/// `A(S, k)` as a float: exact rationals up to [`EXACT_LIMIT`] in both
/// arguments, compensated floating point beyond.
pub fn expected_ancestors(s: usize, k: usize) -> Result<f64> {
    if s <= EXACT_LIMIT && k <= EXACT_LIMIT {
        expected_ancestors_exact(s, k).map(|r| rational_to_f64(&r))
    } else {
        expected_ancestors_f64(s, k)
    }
}

/// Correctly scaled conversion that survives huge numerators and
/// denominators.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let shift = r.numer().bits().max(r.denom().bits()) as i64 - 900;
    let (n, d) = if shift > 0 {
        (r.numer() >> shift as usize, r.denom() >> shift as usize)
    } else {
        (r.numer().clone(), r.denom().clone())
    };
    n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
}

/// One of the recursive sequences bounding the active share per level.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSequence {
    /// `Some(S)` for the `a_{S,i}` sequence, `None` for `b_i`.
    pub sample_size: Option<usize>,
    /// Values from index 0.
    pub values: Vec<f64>,
    /// `value - limit` (limit `1/S` or `0`), carried by a separate recursion
    /// that keeps full relative precision as the sequence flattens.
    pub excess: Vec<f64>,
}

impl BoundSequence {
    pub fn limit(&self) -> f64 {
        self.sample_size.map_or(0.0, |s| 1.0 / s as f64)
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        self.values.get(i).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `a_{S,0} = 1`, `a_{S,i+1} = 1 - (1 - 1/S)^{a_{S,i} S}` for `i < n`.
pub fn a_sequence(s: usize, n: usize) -> Result<BoundSequence> {
    if s < 2 {
        return domain("a-sequence needs a sample size of at least 2");
    }
    let sf = s as f64;
    let log_q = (-1.0 / sf).ln_1p();
    let q = 1.0 - 1.0 / sf;
    let mut values = Vec::with_capacity(n + 1);
    let mut excess = Vec::with_capacity(n + 1);
    values.push(1.0);
    excess.push(1.0 - 1.0 / sf);
    for i in 0..n {
        values.push(-(values[i] * sf * log_q).exp_m1());
        // a_{i+1} - 1/S = q - q^{a_i S} = -q expm1(S e_i ln q)
        excess.push(-q * (sf * excess[i] * log_q).exp_m1());
    }
    Ok(BoundSequence {
        sample_size: Some(s),
        values,
        excess,
    })
}

/// `b_0 = 1`, `b_{i+1} = 1 - e^{-b_i}` for `i < n`.
pub fn b_sequence(n: usize) -> BoundSequence {
    let mut values = Vec::with_capacity(n + 1);
    values.push(1.0f64);
    for i in 0..n {
        values.push(-(-values[i]).exp_m1());
    }
    BoundSequence {
        sample_size: None,
        excess: values.clone(),
        values,
    }
}

/// Smallest `i` with `a_{S,i} - 1/S < tol`.
pub fn a_limit_iterations(s: usize, tol: f64, cap: u64) -> Result<u64> {
    if s < 2 {
        return domain("a-sequence needs a sample size of at least 2");
    }
    if !(tol > 0.0) {
        return domain("tolerance must be positive");
    }
    let sf = s as f64;
    let log_q = (-1.0 / sf).ln_1p();
    let q = 1.0 - 1.0 / sf;
    let mut excess = 1.0 - 1.0 / sf;
    let mut i = 0u64;
    while excess >= tol {
        if i >= cap {
            return Err(Error::IterationCap {
                cap,
                context: format!("a-sequence for S={s} still {excess:e} above 1/S"),
            });
        }
        excess = -q * (sf * excess * log_q).exp_m1();
        i += 1;
    }
    Ok(i)
}

/// Which index of the bounding sequences is paired with `A(S, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundAlignment {
    /// `a_k S`, as the bound is usually quoted.
    Literal,
    /// `a_{k-2} S`: the bottom level has `S` active nodes and the top level
    /// sits `k - 2` resampling steps above it.
    Shifted,
}

impl BoundAlignment {
    pub fn index(self, k: usize) -> usize {
        match self {
            BoundAlignment::Literal => k,
            BoundAlignment::Shifted => k.saturating_sub(2),
        }
    }
}

/// Lower (`b`) and upper (`a`) bounds on `A(S, k)` under `alignment`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AncestorBounds {
    pub lower: f64,
    pub upper: f64,
}

pub fn ancestor_bounds(s: usize, k: usize, alignment: BoundAlignment) -> Result<AncestorBounds> {
    check_districts(s, k)?;
    let idx = alignment.index(k);
    let sf = s as f64;
    let lower = b_sequence(idx).values[idx] * sf;
    let upper = if s >= 2 {
        a_sequence(s, idx)?.values[idx] * sf
    } else {
        1.0
    };
    Ok(AncestorBounds { lower, upper })
}

/// A probability vector over the `S` candidate parents of one level.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return domain("probability vector is empty");
        }
        if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return domain("probabilities must be finite and non-negative");
        }
        let total = compensated_sum(p.iter().copied());
        if (total - 1.0).abs() > Self::SUM_TOLERANCE {
            return domain(format!("probabilities sum to {total}, not 1"));
        }
        Ok(ProbabilityVector(p))
    }

    /// Normalises non-negative weights.
    pub fn from_weights(w: &[f64]) -> Result<Self> {
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return domain("weights must be finite and non-negative");
        }
        let total = compensated_sum(w.iter().copied());
        if !(total > 0.0) {
            return domain("weights sum to zero");
        }
        Self::new(w.iter().map(|x| x / total).collect())
    }

    pub fn uniform(s: usize) -> Self {
        ProbabilityVector(vec![1.0 / s as f64; s])
    }

    /// `(r, 1, 1, ..., 1)` normalised.
    pub fn spike(s: usize, ratio: f64) -> Result<Self> {
        if s == 0 || !(ratio > 0.0) || !ratio.is_finite() {
            return domain("spike needs S >= 1 and a positive finite ratio");
        }
        let mut w = vec![1.0; s];
        w[0] = ratio;
        Self::from_weights(&w)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `Σ_j (1 - (1 - p_j)^a)`: expected distinct parents chosen by `a` active
/// nodes under parent-selection probabilities `p`.
pub fn nonuniform_one_step_expectation(p: &ProbabilityVector, a: u64) -> Result<f64> {
    if a == 0 {
        return domain("active count must be at least 1");
    }
    let a = a as f64;
    Ok(compensated_sum(
        p.as_slice().iter().map(|&pj| -(a * (-pj).ln_1p()).exp_m1()),
    ))
}

/// `Σ_j (1 - p_j)^a`.
pub fn complement_power_sum(p: &ProbabilityVector, a: u64) -> f64 {
    let a = a as f64;
    compensated_sum(p.as_slice().iter().map(|&pj| (a * (-pj).ln_1p()).exp()))
}
