//! Small statistical helpers shared by the Monte Carlo experiments.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

impl Estimate {
    /// Welford pass over `values` in the given order.
    pub fn from_values<I: IntoIterator<Item = f64>>(values: I) -> Estimate {
        let mut count = 0usize;
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for x in values {
            count += 1;
            let delta = x - mean;
            mean += delta / count as f64;
            m2 += delta * (x - mean);
        }
        let stderr = if count > 1 {
            (m2 / (count - 1) as f64 / count as f64).sqrt()
        } else {
            0.0
        };
        Estimate { mean, stderr, count }
    }

    /// Unbiased sample variance recovered from the standard error.
    pub fn variance(&self) -> f64 {
        self.stderr * self.stderr * self.count as f64
    }

    /// Whether `value` lies within `sigmas` standard errors of the mean.
    /// A zero standard error requires exact agreement up to `1e-12`.
    pub fn agrees_with(&self, value: f64, sigmas: f64) -> bool {
        let slack = (sigmas * self.stderr).max(1e-12 * value.abs().max(1.0));
        (self.mean - value).abs() <= slack
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Pearson goodness-of-fit test of observed counts against cell
/// probabilities. Cells with zero expected probability must have zero counts
/// and are dropped; returns `(statistic, degrees_of_freedom, p_value)`.
pub fn chi_square_gof(observed: &[u64], probabilities: &[f64]) -> (f64, usize, f64) {
    assert_eq!(observed.len(), probabilities.len());
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&o, &p) in observed.iter().zip(probabilities) {
        if p <= 0.0 {
            if o > 0 {
                return (f64::INFINITY, 0, 0.0);
            }
            continue;
        }
        let e = p * total as f64;
        stat += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    let df = cells.saturating_sub(1);
    let p = if df == 0 {
        1.0
    } else {
        ChiSquared::new(df as f64)
            .map(|d| d.sf(stat))
            .unwrap_or(f64::NAN)
    };
    (stat, df, p)
}

/// Anderson–Darling normality test with estimated mean and variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AndersonDarling {
    /// Small-sample adjusted statistic `A²(1 + 0.75/n + 2.25/n²)`.
    pub statistic: f64,
    pub p_value: f64,
}

/// Returns `None` for fewer than 8 values or a degenerate (constant) sample.
pub fn anderson_darling(values: &[f64]) -> Option<AndersonDarling> {
    let n = values.len();
    if n < 8 {
        return None;
    }
    let est = Estimate::from_values(values.iter().copied());
    let sd = est.variance().sqrt();
    if !(sd > 0.0) {
        return None;
    }
    let std_normal = Normal::standard();
    let mut z: Vec<f64> = values.iter().map(|x| (x - est.mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let lo = std_normal.cdf(z[i]).max(1e-300).ln();
        let hi = std_normal.sf(z[n - 1 - i]).max(1e-300).ln();
        acc += (2 * i + 1) as f64 * (lo + hi);
    }
    let a2 = -nf - acc / nf;
    let statistic = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    // D'Agostino & Stephens (1986), case 3.
    let p_value = if statistic >= 0.6 {
        (1.2937 - 5.709 * statistic + 0.0186 * statistic * statistic).exp()
    } else if statistic >= 0.34 {
        (0.9177 - 4.279 * statistic - 1.38 * statistic * statistic).exp()
    } else if statistic >= 0.2 {
        1.0 - (-8.318 + 42.796 * statistic - 59.938 * statistic * statistic).exp()
    } else {
        1.0 - (-13.436 + 101.14 * statistic - 223.73 * statistic * statistic).exp()
    };
    Some(AndersonDarling {
        statistic,
        p_value: p_value.clamp(0.0, 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use rand::Rng;

    #[test]
    fn estimate_of_known_values() {
        let e = Estimate::from_values([1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        // sample variance 5/3, stderr sqrt(5/12)
        assert!((e.stderr - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert!((e.variance() - 5.0 / 3.0).abs() < 1e-12);
        let single = Estimate::from_values([3.0]);
        assert_eq!(single.stderr, 0.0);
        assert!(single.agrees_with(3.0, 3.0));
        assert!(!single.agrees_with(3.1, 3.0));
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
    }

    #[test]
    fn chi_square_accepts_exact_counts_and_rejects_skew() {
        let (_, df, p) = chi_square_gof(&[100, 600, 200, 0], &[0.1, 0.6, 0.2, 0.1]);
        assert_eq!(df, 3);
        assert!(p < 1e-6);
        let (stat, df, p) = chi_square_gof(&[100, 600, 200], &[1.0 / 9.0, 6.0 / 9.0, 2.0 / 9.0]);
        assert_eq!(df, 2);
        assert!(stat < 1e-9 && p > 0.99);
        let (stat, _, p) = chi_square_gof(&[1, 5], &[0.0, 1.0]);
        assert!(stat.is_infinite() && p == 0.0);
    }

    #[test]
    fn anderson_darling_separates_normal_from_uniform() {
        let mut rng = stream_rng(3, "ad", &[]);
        let normal = rand_normal(&mut rng, 2000);
        let ad = anderson_darling(&normal).unwrap();
        assert!(ad.p_value > 0.001, "{ad:?}");
        let uniform: Vec<f64> = (0..2000).map(|_| rng.random::<f64>()).collect();
        let ad = anderson_darling(&uniform).unwrap();
        assert!(ad.p_value < 0.001, "{ad:?}");
        assert!(anderson_darling(&[1.0; 50]).is_none());
    }

    fn rand_normal<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
        // Box-Muller keeps the test free of extra distribution crates.
        (0..n)
            .map(|_| {
                let u: f64 = rng.random::<f64>().max(1e-300);
                let v: f64 = rng.random();
                (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
            })
            .collect()
    }
}
