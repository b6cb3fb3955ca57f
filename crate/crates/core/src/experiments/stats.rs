//! Empirical distributions and two-sample comparison statistics.

use serde::Serialize;

use crate::error::{Error, Result};

/// Sorted sample set.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
}

impl EmpiricalDistribution {
    /// Sorts the samples. NaNs are ordered last.
    pub fn new(mut samples: Vec<f64>) -> Self {
        samples.sort_unstable_by(f64::total_cmp);
        Self { samples }
    }

    pub fn count(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Fraction of samples `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        if self.samples.is_empty() {
            return f64::NAN;
        }
        self.samples.partition_point(|&s| s <= x) as f64 / self.samples.len() as f64
    }

    /// Binomial standard error of [`cdf`](Self::cdf) at `x`.
    pub fn cdf_standard_error(&self, x: f64) -> f64 {
        let p = self.cdf(x);
        (p * (1.0 - p) / self.samples.len() as f64).sqrt()
    }

    /// Fraction of samples `> x`.
    pub fn exceedance(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    /// Lower empirical quantile, `q` in `[0, 1]`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if self.samples.is_empty() {
            return Err(Error::invalid("quantile of an empty distribution"));
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::invalid(format!("quantile level {q} outside [0, 1]")));
        }
        let n = self.samples.len();
        let idx = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
        Ok(self.samples[idx])
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let n = self.samples.len() as f64;
        self.samples.iter().map(|s| (s - m) * (s - m)).sum::<f64>() / (n - 1.0)
    }

    /// Density histogram over `[lo, hi)` with `bins` equal bins. Returns bin
    /// centers and densities normalized by the total sample count, so mass
    /// outside the range is not redistributed.
    pub fn histogram(&self, lo: f64, hi: f64, bins: usize) -> Result<Vec<(f64, f64)>> {
        if bins == 0 || !(hi > lo) {
            return Err(Error::invalid("histogram needs bins >= 1 and hi > lo"));
        }
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        let start = self.samples.partition_point(|&s| s < lo);
        for &s in &self.samples[start..] {
            if s >= hi {
                break;
            }
            let b = (((s - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let total = self.samples.len() as f64;
        Ok(counts
            .into_iter()
            .enumerate()
            .map(|(i, c)| (lo + (i as f64 + 0.5) * width, c as f64 / (total * width)))
            .collect())
    }
}

impl FromIterator<f64> for EmpiricalDistribution {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_distance(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("KS distance needs two nonempty samples"));
    }
    let (x, y) = (a.samples(), b.samples());
    let (na, nb) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// One-sample KS distance against a continuous CDF.
pub fn ks_distance_to(a: &EmpiricalDistribution, cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::invalid("KS distance needs a nonempty sample"));
    }
    let n = a.count() as f64;
    Ok(a.samples().iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs())
    }))
}

/// Empirical CDF at each grid point.
pub fn empirical_cdf_at(dist: &EmpiricalDistribution, grid: &[f64]) -> Vec<(f64, f64)> {
    grid.iter().map(|&x| (x, dist.cdf(x))).collect()
}

/// Sample Pearson correlation; NaN for degenerate input.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    if n < 2 {
        return f64::NAN;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x[..n].iter().zip(&y[..n]) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    sxy / (sxx * syy).sqrt()
}

/// Streaming mean and variance (Welford), mergeable across chunks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct RunningMoments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        let n = self.count + other.count;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n as f64;
        self.m2 += other.m2 + d * d * self.count as f64 * other.count as f64 / n as f64;
        self.count = n;
    }

    pub fn variance(&self) -> f64 {
        self.m2 / (self.count as f64 - 1.0)
    }

    pub fn standard_error(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}
