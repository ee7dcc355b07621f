//! Scale dependence of the median `lambda_n`: exponent fit, weak
//! multiplicativity, the a priori bound on `Lambda_n` and the `phi`/`psi`
//! quantile transfer.

use lfpp_field::{FieldError, Result};
use serde::{Deserialize, Serialize};

use crate::mc::SampleSet;
use crate::quantile::{quantile, quantile_sorted, QuantileTable};
use crate::stats::{bootstrap_groups, ols, Interval};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    /// OLS slope of `-log2 lambda_n` against `n`.
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    /// `(n, -log2 lambda_n - slope n)`.
    pub residuals: Vec<(f64, f64)>,
    /// `max_n |residual_n| / sqrt(n)` over `n > 0`.
    pub band: f64,
    /// `1 - xi Q` with `xi = gamma / d_gamma`, `Q = 2/gamma + gamma/2`.
    pub target: Option<f64>,
    pub discrepancy: Option<f64>,
}

/// `1 - xi Q = 1 - (2 + gamma^2 / 2) / d_gamma`.
pub fn exponent_target(gamma: f64, d_gamma: f64) -> f64 {
    let xi = gamma / d_gamma;
    1.0 - xi * (2.0 / gamma + gamma / 2.0)
}

fn neg_log2(lambdas: &[f64]) -> Vec<f64> {
    lambdas.iter().map(|l| -l.log2()).collect()
}

pub fn exponent_fit(ns: &[f64], lambdas: &[f64], gamma_d: Option<(f64, f64)>) -> Result<ExponentFit> {
    if ns.len() < 4 || ns.len() != lambdas.len() {
        return Err(FieldError::Domain(format!("exponent fit needs at least 4 scales, got {}", ns.len())));
    }
    if lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(FieldError::Domain("medians must be positive".into()));
    }
    let y = neg_log2(lambdas);
    let fit = ols(ns, &y).ok_or_else(|| FieldError::Domain("scales must not all coincide".into()))?;
    let residuals: Vec<(f64, f64)> = ns.iter().zip(&y).map(|(&n, &v)| (n, v - fit.slope * n)).collect();
    let band = residuals.iter().filter(|(n, _)| *n > 0.0).map(|(n, r)| r.abs() / n.sqrt()).fold(0.0, f64::max);
    let target = gamma_d.map(|(g, d)| exponent_target(g, d));
    Ok(ExponentFit {
        slope: fit.slope,
        intercept: fit.intercept,
        slope_se: fit.slope_se,
        residuals,
        band,
        target,
        discrepancy: target.map(|t| fit.slope - t),
    })
}

pub fn exponent_fit_table(qt: &QuantileTable, gamma_d: Option<(f64, f64)>) -> Result<ExponentFit> {
    exponent_fit(&qt.scales(), &qt.lambdas(), gamma_d)
}

fn median_of(x: &[f64]) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    quantile_sorted(&s, 0.5)
}

/// 99% bootstrap interval of the exponent slope, resampling each scale.
pub fn exponent_slope_ci(sets: &[&SampleSet], resamples: usize, seed: u64) -> Result<Interval> {
    let ns: Vec<f64> = sets.iter().map(|s| s.scale).collect();
    let lambdas: Vec<f64> = sets.iter().map(|s| median_of(&s.values)).collect();
    let est = exponent_fit(&ns, &lambdas, None)?.slope;
    let groups: Vec<&[f64]> = sets.iter().map(|s| s.values.as_slice()).collect();
    Ok(bootstrap_groups(&groups, resamples, seed, est, |picks| {
        let l: Vec<f64> = picks.iter().map(|p| median_of(p)).collect();
        ols(&ns, &neg_log2(&l)).map_or(f64::NAN, |f| f.slope)
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakMultReport {
    /// `(n, k, |log l_{n+k} - log l_n - log l_k| / sqrt k)`.
    pub deviations: Vec<(f64, f64, f64)>,
    pub max_deviation: f64,
    /// Per `k`: OLS slope of the deviation against `n` (growth check).
    pub growth: Vec<(f64, f64)>,
    /// `(n, r, |log l_{n+r} - log l_n|)` for fractional `r`.
    pub fractional: Vec<(f64, f64, f64)>,
    pub max_fractional: f64,
}

fn is_int(x: f64) -> bool {
    x.fract() == 0.0
}

fn lookup(ns: &[f64], lambdas: &[f64], n: f64) -> Option<f64> {
    ns.iter().position(|&v| (v - n).abs() < 1e-12).map(|i| lambdas[i])
}

/// Deviations from exact multiplicativity over all integer `n, k >= 1` with
/// `n + k` on the grid, plus the fractional-scale table.
pub fn weak_mult_check(ns: &[f64], lambdas: &[f64]) -> Result<WeakMultReport> {
    if ns.len() != lambdas.len() {
        return Err(FieldError::Domain("scale and median lists differ in length".into()));
    }
    let ints: Vec<f64> = ns.iter().copied().filter(|&n| is_int(n) && n >= 1.0).collect();
    let mut deviations = Vec::new();
    for &n in &ints {
        for &k in &ints {
            if let Some(lnk) = lookup(ns, lambdas, n + k) {
                let ln = lookup(ns, lambdas, n).unwrap();
                let lk = lookup(ns, lambdas, k).unwrap();
                deviations.push((n, k, (lnk.ln() - ln.ln() - lk.ln()).abs() / k.sqrt()));
            }
        }
    }
    let mut growth = Vec::new();
    for &k in &ints {
        let pts: Vec<&(f64, f64, f64)> = deviations.iter().filter(|d| d.1 == k).collect();
        if pts.len() >= 2 {
            let x: Vec<f64> = pts.iter().map(|d| d.0).collect();
            let y: Vec<f64> = pts.iter().map(|d| d.2).collect();
            if let Some(f) = ols(&x, &y) {
                growth.push((k, f.slope));
            }
        }
    }
    let mut fractional = Vec::new();
    for (&s, &l) in ns.iter().zip(lambdas) {
        if !is_int(s) {
            if let Some(lb) = lookup(ns, lambdas, s.floor()) {
                fractional.push((s.floor(), s.fract(), (l.ln() - lb.ln()).abs()));
            }
        }
    }
    Ok(WeakMultReport {
        max_deviation: deviations.iter().map(|d| d.2).fold(0.0, f64::max),
        max_fractional: fractional.iter().map(|d| d.2).fold(0.0, f64::max),
        deviations,
        growth,
        fractional,
    })
}

/// 99% bootstrap interval of the maximal deviation.
pub fn weak_mult_ci(sets: &[&SampleSet], resamples: usize, seed: u64) -> Result<Interval> {
    let ns: Vec<f64> = sets.iter().map(|s| s.scale).collect();
    let lambdas: Vec<f64> = sets.iter().map(|s| median_of(&s.values)).collect();
    let est = weak_mult_check(&ns, &lambdas)?.max_deviation;
    let groups: Vec<&[f64]> = sets.iter().map(|s| s.values.as_slice()).collect();
    Ok(bootstrap_groups(&groups, resamples, seed, est, |picks| {
        let l: Vec<f64> = picks.iter().map(|p| median_of(p)).collect();
        weak_mult_check(&ns, &l).map_or(f64::NAN, |r| r.max_deviation)
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AprioriReport {
    /// `max log Lambda_n / sqrt n` over the first half of the scales.
    pub c_hat: f64,
    /// `(n, log Lambda_n / sqrt n)`.
    pub normalized: Vec<(f64, f64)>,
    /// Whether `Lambda_n <= e^{c_hat sqrt n}` up to the bootstrap half-width
    /// at every scale.
    pub bounded: bool,
    /// OLS slope of `log Lambda_n / sqrt n` against `n` and its standard error.
    pub growth_slope: f64,
    pub growth_se: f64,
    /// No growth faster than `sqrt n`: slope <= 3 standard errors.
    pub sub_sqrt: bool,
}

/// Fits `c_hat` on the lower half of the scales and checks the bound on all.
pub fn lambda_apriori(qt: &QuantileTable) -> Result<AprioriReport> {
    let rows: Vec<_> = qt.rows.iter().filter(|r| r.n >= 1.0).collect();
    if rows.len() < 3 {
        return Err(FieldError::Domain("a priori check needs at least 3 scales n >= 1".into()));
    }
    let normalized: Vec<(f64, f64)> = rows.iter().map(|r| (r.n, r.big_lambda.ln() / r.n.sqrt())).collect();
    let half = rows.len().div_ceil(2);
    let c_hat = normalized[..half].iter().map(|v| v.1).fold(0.0, f64::max);
    let bounded = rows.iter().all(|r| r.big_lambda <= (c_hat * r.n.sqrt()).exp() + r.ratio_hw);
    let x: Vec<f64> = normalized.iter().map(|v| v.0).collect();
    let y: Vec<f64> = normalized.iter().map(|v| v.1).collect();
    let f = ols(&x, &y).ok_or_else(|| FieldError::Domain("degenerate scale grid".into()))?;
    Ok(AprioriReport {
        c_hat,
        normalized,
        bounded,
        growth_slope: f.slope,
        growth_se: f.slope_se,
        sub_sqrt: f.slope <= 3.0 * f.slope_se,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub p: f64,
    /// `(n, ell_phi(p) / ell_psi(p/2), bar_psi(p/2) / bar_phi(p))`.
    pub rows: Vec<(f64, f64, f64)>,
    /// Smallest constant with `ell_psi(p/2) >= ell_phi(p) / C` and
    /// `bar_psi(p/2) <= C bar_phi(p)` at every scale.
    pub c_hat: f64,
}

/// Quantile transfer between `phi` and `psi` crossing samples on one scale grid.
pub fn ratio_transfer(phi: &[&SampleSet], psi: &[&SampleSet], p: f64) -> Result<TransferReport> {
    if phi.len() != psi.len() || phi.iter().zip(psi).any(|(a, b)| a.scale != b.scale) {
        return Err(FieldError::Domain("phi and psi samples must share one scale grid".into()));
    }
    let mut rows = Vec::new();
    for (a, b) in phi.iter().zip(psi) {
        let lo = quantile(&a.values, p)? / quantile(&b.values, p / 2.0)?;
        let hi = quantile(&b.values, 1.0 - p / 2.0)? / quantile(&a.values, 1.0 - p)?;
        rows.push((a.scale, lo, hi));
    }
    let c_hat = rows.iter().map(|r| r.1.max(r.2)).fold(1.0, f64::max);
    Ok(TransferReport { p, rows, c_hat })
}
