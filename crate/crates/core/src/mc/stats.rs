//! Goodness-of-fit helpers: Kolmogorov-Smirnov, Pearson χ² with pooled
//! bins, and sample means with standard errors.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::analytic::ProbVector;
use crate::error::{Error, Result};

use super::EmpiricalPmf;

/// Smallest expected count per pooled χ² bin.
pub const MIN_EXPECTED: f64 = 5.0;

/// Kolmogorov survival function `Q(z) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²z²}`.
pub fn kolmogorov_sf(z: f64) -> f64 {
    if z < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * z * z).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    /// `sup |F_n − F|`.
    pub statistic: f64,
    pub samples: usize,
    /// Asymptotic p-value with Stephens' small-sample correction.
    pub p_value: f64,
}

impl KsResult {
    /// Critical value of the statistic at level `alpha`.
    pub fn critical_value(&self, alpha: f64) -> f64 {
        ks_critical_value(self.samples, alpha)
    }

    pub fn passes(&self, alpha: f64) -> bool {
        self.statistic < self.critical_value(alpha)
    }
}

fn stephens(n: usize) -> f64 {
    let r = (n as f64).sqrt();
    r + 0.12 + 0.11 / r
}

/// One-sample KS test of `samples` against a continuous CDF.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::domain("ks_test", "need at least one sample"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(KsResult {
        statistic: d,
        samples: sorted.len(),
        p_value: kolmogorov_sf(stephens(sorted.len()) * d),
    })
}

/// `D` such that `prob(D_n > D) = alpha` under the null.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    let (mut lo, mut hi) = (0.2f64, 5.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_sf(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi) / stephens(n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson χ² of an empirical histogram against model probabilities.
///
/// Bins are pooled left to right until each expects at least five counts.
/// The last bin collects everything from its first index upward, including
/// counts beyond the model truncation, and takes the complement of the
/// earlier bins as its probability.
pub fn chi_square_gof(emp: &EmpiricalPmf, model: &ProbVector) -> Result<ChiSquareResult> {
    let m = emp.total() as f64;
    if emp.total() == 0 {
        return Err(Error::contract("chi_square_gof", "empty histogram"));
    }
    let probs = model.values();
    // (first index, probability) of each pooled bin
    let mut bins: Vec<(usize, f64)> = Vec::new();
    let mut start = 0usize;
    let mut acc = 0.0;
    for (n, &p) in probs.iter().enumerate() {
        acc += p;
        if acc * m >= MIN_EXPECTED {
            bins.push((start, acc));
            start = n + 1;
            acc = 0.0;
        }
    }
    let used: f64 = bins.iter().map(|b| b.1).sum();
    let rest = (1.0 - used).max(0.0);
    if rest * m >= MIN_EXPECTED {
        bins.push((start, rest));
    } else if let Some(last) = bins.last_mut() {
        last.1 += rest;
    }
    if bins.len() < 2 {
        return Err(Error::contract(
            "chi_square_gof",
            format!(
                "pooling left {} bin(s); at least two are needed",
                bins.len()
            ),
        ));
    }
    let counts = emp.counts();
    let mut statistic = 0.0;
    for (b, &(first, p)) in bins.iter().enumerate() {
        let end = bins.get(b + 1).map_or(counts.len().max(first), |nb| nb.0);
        let observed: u64 = counts.iter().take(end).skip(first).sum();
        let expected = p * m;
        statistic += (observed as f64 - expected).powi(2) / expected;
    }
    let dof = bins.len() - 1;
    let dist = ChiSquared::new(dof as f64)
        .map_err(|e| Error::contract("chi_square_gof", e.to_string()))?;
    Ok(ChiSquareResult {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    })
}

/// Sample mean and its standard error.
pub fn mean_and_stderr(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let mut n = 0.0;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for v in values {
        n += 1.0;
        let d = v - mean;
        mean += d / n;
        m2 += d * (v - mean);
    }
    if n < 2.0 {
        return (mean, f64::INFINITY);
    }
    (mean, (m2 / (n - 1.0) / n).sqrt())
}

/// Whether `observed` lies within `k` standard errors of `expected`.
pub fn within_sigmas(observed: f64, expected: f64, stderr: f64, k: f64) -> bool {
    (observed - expected).abs() <= k * stderr
}
