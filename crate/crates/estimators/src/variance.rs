//! Variance of `log L` against the Poincare bound, and the quantile spread
//! inequality `(bar-ell(Z,p) - ell(Z,p))^2 <= (2/p^2) Var Z` for `Z = log L`.

use lfpp_field::{FieldError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

use crate::quantile::{quantile, quantile_sorted};
use crate::stats::{bootstrap_indices, variance, variance_se};

pub const MIN_VAR_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarReport {
    pub variance: f64,
    pub se: f64,
    /// `xi^2 (n + 1) log 2`.
    pub bound: f64,
    pub ok: bool,
    pub count: usize,
}

/// Sample variance of `log L` at scale `n` and its Poincare bound.
pub fn var_log_crossing(samples: &[f64], xi: f64, n: f64) -> Result<VarReport> {
    if samples.len() < MIN_VAR_SAMPLES {
        return Err(FieldError::Domain(format!(
            "variance check needs at least {MIN_VAR_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let logs: Vec<f64> = samples.iter().map(|v| v.ln()).collect();
    let v = variance(&logs);
    let se = variance_se(&logs);
    let bound = xi * xi * (n + 1.0) * LN_2;
    Ok(VarReport { variance: v, se, bound, ok: v <= bound + 3.0 * se, count: samples.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileVarReport {
    pub p: f64,
    /// `(bar-ell - ell)^2` of `log L`.
    pub spread_sq: f64,
    /// `(2 / p^2) Var log L`.
    pub bound: f64,
    /// Bootstrap standard error of `spread_sq - bound`.
    pub se: f64,
    pub ok: bool,
}

pub fn quantile_variance_link(samples: &[f64], p: f64, resamples: usize, seed: u64) -> Result<QuantileVarReport> {
    if !(p > 0.0 && p < 0.5) {
        return Err(FieldError::Domain(format!("p must lie in (0, 1/2), got {p}")));
    }
    let z: Vec<f64> = samples.iter().map(|v| v.ln()).collect();
    let spread = quantile(&z, 1.0 - p)? - quantile(&z, p)?;
    let spread_sq = spread * spread;
    let bound = 2.0 / (p * p) * variance(&z);
    let se = if resamples > 0 {
        bootstrap_indices(z.len(), resamples, seed, spread_sq - bound, |idx| {
            let mut b: Vec<f64> = idx.iter().map(|&i| z[i]).collect();
            let var = variance(&b);
            b.sort_by(f64::total_cmp);
            let d = quantile_sorted(&b, 1.0 - p) - quantile_sorted(&b, p);
            d * d - 2.0 / (p * p) * var
        })
        .se
    } else {
        0.0
    };
    Ok(QuantileVarReport { p, spread_sq, bound, se, ok: spread_sq <= bound + 3.0 * se })
}
