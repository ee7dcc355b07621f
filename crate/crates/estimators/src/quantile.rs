//! Empirical quantiles `ell_n(p)`, `bar-ell_n(p) = ell_n(1 - p)`, medians and
//! the running ratio `Lambda_n = max_{k <= n} bar-ell_k / ell_k`.

use lfpp_field::{derive_seed, FieldError, Result};
use serde::{Deserialize, Serialize};

use crate::mc::SampleSet;
use crate::stats::bootstrap;

/// One-based order-statistic index `ceil(p N)`, clamped to `[1, N]`.
///
/// Products within `1e-9` of an integer are rounded first so that, e.g.,
/// `0.3 * 10` selects the third value despite its binary representation.
pub fn order_index(n: usize, p: f64) -> usize {
    let k = p * n as f64;
    let r = k.round();
    let idx = if (k - r).abs() < 1e-9 { r } else { k.ceil() };
    (idx as usize).clamp(1, n.max(1))
}

fn check(n: usize, p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(FieldError::Domain(format!("quantile level must lie in (0, 1), got {p}")));
    }
    let need = 1.0 / p.min(1.0 - p);
    if (n as f64) < need - 1e-9 {
        return Err(FieldError::Domain(format!("quantile at p={p} needs at least {need:.1} samples, got {n}")));
    }
    Ok(())
}

pub(crate) fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    sorted[order_index(sorted.len(), p) - 1]
}

/// Order statistic at index `ceil(p N)`.
pub fn quantile(samples: &[f64], p: f64) -> Result<f64> {
    check(samples.len(), p)?;
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&s, p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileRow {
    pub n: f64,
    pub p: f64,
    pub count: usize,
    pub ell: f64,
    pub bar_ell: f64,
    pub lambda: f64,
    /// `max_{k <= n} bar-ell_k / ell_k` over the table's scales.
    pub big_lambda: f64,
    /// Bootstrap 99% half-widths.
    pub ell_hw: f64,
    pub bar_ell_hw: f64,
    pub lambda_hw: f64,
    pub ratio_hw: f64,
}

impl QuantileRow {
    pub fn ratio(&self) -> f64 {
        self.bar_ell / self.ell
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileTable {
    pub p: f64,
    pub xi: f64,
    pub observable: String,
    pub rows: Vec<QuantileRow>,
}

impl QuantileTable {
    pub fn scales(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.n).collect()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.lambda).collect()
    }

    pub fn row(&self, n: f64) -> Option<&QuantileRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

/// Quantile table over sample sets of one observable, sorted by scale.
/// `resamples = 0` skips the bootstrap (half-widths 0).
pub fn quantile_table(sets: &[&SampleSet], p: f64, resamples: usize, seed: u64) -> Result<QuantileTable> {
    if !(p > 0.0 && p < 0.5) {
        return Err(FieldError::Domain(format!("table level p must lie in (0, 1/2), got {p}")));
    }
    let first = sets.first().ok_or_else(|| FieldError::Domain("no sample sets".into()))?;
    if sets.iter().any(|s| s.observable != first.observable || s.xi != first.xi) {
        return Err(FieldError::Domain("quantile table mixes observables or xi values".into()));
    }
    let mut sorted: Vec<&SampleSet> = sets.to_vec();
    sorted.sort_by(|a, b| a.scale.total_cmp(&b.scale));
    let mut rows = Vec::with_capacity(sorted.len());
    let mut running = 1.0f64;
    for (i, set) in sorted.iter().enumerate() {
        let v = &set.values;
        let ell = quantile(v, p)?;
        let bar_ell = quantile(v, 1.0 - p)?;
        let lambda = quantile(v, 0.5)?;
        let hw = |stat: &dyn Fn(&[f64]) -> f64, tag: u64| {
            if resamples == 0 {
                0.0
            } else {
                bootstrap(v, resamples, derive_seed(seed, &[i as u64, tag]), stat).half_width()
            }
        };
        let q = |x: &[f64], level: f64| {
            let mut s = x.to_vec();
            s.sort_by(f64::total_cmp);
            quantile_sorted(&s, level)
        };
        let ell_hw = hw(&|x| q(x, p), 0);
        let bar_ell_hw = hw(&|x| q(x, 1.0 - p), 1);
        let lambda_hw = hw(&|x| q(x, 0.5), 2);
        let ratio_hw = hw(&|x| q(x, 1.0 - p) / q(x, p), 3);
        running = running.max(bar_ell / ell);
        rows.push(QuantileRow {
            n: set.scale,
            p,
            count: v.len(),
            ell,
            bar_ell,
            lambda,
            big_lambda: running,
            ell_hw,
            bar_ell_hw,
            lambda_hw,
            ratio_hw,
        });
    }
    Ok(QuantileTable { p, xi: first.xi, observable: first.observable.clone(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_rule() {
        assert_eq!(order_index(10, 0.3), 3);
        assert_eq!(order_index(10, 0.31), 4);
        assert_eq!(order_index(11, 0.5), 6);
        assert_eq!(order_index(5, 1e-9), 1);
    }
}
