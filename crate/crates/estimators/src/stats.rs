//! Reductions, regressions and the bootstrap.

use lfpp_field::derive_seed;
use lfpp_field::seed::rng;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.5758293035489004;

/// Default number of bootstrap resamples.
pub const BOOTSTRAP: usize = 500;

/// Sum by recursive halving; the reduction tree depends only on the length.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 8 {
        return x.iter().sum();
    }
    let mid = x.len() / 2;
    pairwise_sum(&x[..mid]) + pairwise_sum(&x[mid..])
}

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(x) / x.len() as f64
}

/// Unbiased sample variance (two-pass).
pub fn variance(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(x);
    let d: Vec<f64> = x.iter().map(|v| (v - m) * (v - m)).collect();
    pairwise_sum(&d) / (n - 1) as f64
}

/// Standard error of the sample mean.
pub fn mean_se(x: &[f64]) -> f64 {
    (variance(x) / x.len() as f64).sqrt()
}

/// Large-sample standard error of the unbiased variance, from the fourth
/// central moment: `Var(s^2) ~ (m4 - s^4 (N-3)/(N-1)) / N`.
pub fn variance_se(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 4 {
        return f64::INFINITY;
    }
    let m = mean(x);
    let s2 = variance(x);
    let d4: Vec<f64> = x.iter().map(|v| (v - m).powi(4)).collect();
    let m4 = pairwise_sum(&d4) / n as f64;
    let nf = n as f64;
    ((m4 - s2 * s2 * (nf - 3.0) / (nf - 1.0)).max(0.0) / nf).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Standard error of the slope from the weighted residuals.
    pub slope_se: f64,
    pub points: usize,
}

/// Weighted least squares `y ~ a + b x`. Needs two distinct abscissae.
pub fn wls(x: &[f64], y: &[f64], w: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n || w.len() != n {
        return None;
    }
    let sw = pairwise_sum(w);
    let xw: Vec<f64> = x.iter().zip(w).map(|(a, b)| a * b).collect();
    let yw: Vec<f64> = y.iter().zip(w).map(|(a, b)| a * b).collect();
    let mx = pairwise_sum(&xw) / sw;
    let my = pairwise_sum(&yw) / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * dy;
        syy += w[i] * dy * dy;
    }
    if !(sxx > 0.0) {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut sse = 0.0;
    for i in 0..n {
        let r = y[i] - intercept - slope * x[i];
        sse += w[i] * r * r;
    }
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    // Residual scale estimated from the fit, weights taken as relative.
    let slope_se = if n > 2 { (sse / (n - 2) as f64 / sxx).sqrt() } else { f64::INFINITY };
    Some(LinearFit { slope, intercept, r2, slope_se, points: n })
}

pub fn ols(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    wls(x, y, &vec![1.0; x.len()])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
    pub se: f64,
}

impl Interval {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

/// Percentile bootstrap over index resamples of `0..n`: 99% interval and the
/// standard deviation of the replicated statistic. Non-finite replicates are
/// dropped.
pub fn bootstrap_indices<F>(n: usize, resamples: usize, seed: u64, estimate: f64, stat: F) -> Interval
where
    F: Fn(&[usize]) -> f64,
{
    let mut reps = Vec::with_capacity(resamples);
    let mut idx = vec![0usize; n];
    for b in 0..resamples {
        let mut r = rng(derive_seed(seed, &[b as u64]));
        for slot in idx.iter_mut() {
            *slot = r.random_range(0..n);
        }
        let v = stat(&idx);
        if v.is_finite() {
            reps.push(v);
        }
    }
    if reps.len() < 2 {
        return Interval { estimate, lo: estimate, hi: estimate, se: 0.0 };
    }
    let se = variance(&reps).sqrt();
    reps.sort_by(f64::total_cmp);
    let at = |q: f64| reps[((q * (reps.len() - 1) as f64).round() as usize).min(reps.len() - 1)];
    Interval { estimate, lo: at(0.005), hi: at(0.995), se }
}

/// Bootstrap of a statistic of one sample.
pub fn bootstrap<F>(data: &[f64], resamples: usize, seed: u64, stat: F) -> Interval
where
    F: Fn(&[f64]) -> f64,
{
    let estimate = stat(data);
    bootstrap_indices(data.len(), resamples, seed, estimate, |idx| {
        let b: Vec<f64> = idx.iter().map(|&i| data[i]).collect();
        stat(&b)
    })
}

/// Bootstrap resampling each group independently (one group per scale).
pub fn bootstrap_groups<F>(groups: &[&[f64]], resamples: usize, seed: u64, estimate: f64, stat: F) -> Interval
where
    F: Fn(&[Vec<f64>]) -> f64,
{
    let nmax = groups.iter().map(|g| g.len()).max().unwrap_or(0);
    if nmax < 2 || resamples == 0 {
        return Interval { estimate, lo: estimate, hi: estimate, se: 0.0 };
    }
    // One index draw of length nmax per group; shorter groups reduce it modulo their size.
    bootstrap_indices(nmax * groups.len(), resamples, seed, estimate, |idx| {
        let picks: Vec<Vec<f64>> = groups
            .iter()
            .enumerate()
            .map(|(g, x)| idx[g * nmax..g * nmax + x.len()].iter().map(|&i| x[i % x.len()]).collect())
            .collect();
        stat(&picks)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive() {
        let x: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&x), 500500.0);
        assert_eq!(mean(&[2.0, 4.0]), 3.0);
        assert_eq!(variance(&[1.0, 2.0, 3.0, 4.0]), 5.0 / 3.0);
    }

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let f = ols(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
        assert!((f.r2 - 1.0).abs() < 1e-14);
        assert!(ols(&[1.0, 1.0], &[0.0, 1.0]).is_none());
    }

    #[test]
    fn bootstrap_is_deterministic() {
        let x: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let a = bootstrap(&x, 100, 3, mean);
        let b = bootstrap(&x, 100, 3, mean);
        assert_eq!(a, b);
        assert!(a.lo <= a.estimate && a.estimate <= a.hi);
    }
}
