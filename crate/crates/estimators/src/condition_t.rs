//! Decay of the Condition (T) norm `E[ratio^alpha]^{1/alpha}` in the block
//! scale `K`, with `ratio = sum e^{2 xi psi_{0,K}(P)} / (sum e^{xi psi_{0,K}(P)})^2`
//! over the blocks met by the geodesic of `psi_{0,n}`.

use lfpp_field::{derive_seed, FieldError, GridSpec, KernelFamily, Rect, Result, Sampler, SamplerOptions, SliceMode, TruncationParams};
use lfpp_metric::{build_weights, condition_t_ratio, crossing_with, Orientation, TieBreak};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mc::MIN_REPLICAS;
use crate::stats::{bootstrap_groups, mean, ols, Interval};

const TAG_CT: u64 = 0x636f_6e64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionTConfig {
    pub ks: Vec<u32>,
    /// The field scale is `n = K + n_offset`.
    pub n_offset: u32,
    pub xi: f64,
    pub alpha: f64,
    pub replicas: usize,
    pub trunc: TruncationParams,
    /// Also recompute ratios with reversed tie-breaking.
    pub tie_sensitivity: bool,
}

impl ConditionTConfig {
    pub fn new(ks: Vec<u32>, xi: f64, replicas: usize) -> Self {
        ConditionTConfig { ks, n_offset: 3, xi, alpha: 1.25, replicas, trunc: TruncationParams::default(), tie_sensitivity: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionTRow {
    pub k: u32,
    pub n: f64,
    pub norm: f64,
    pub log_norm: f64,
    pub mean_ratio: f64,
    /// Norm under reversed tie-breaking, when requested.
    pub norm_reversed: Option<f64>,
    pub replicas: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionTReport {
    pub alpha: f64,
    pub xi: f64,
    pub rows: Vec<ConditionTRow>,
    /// Fitted decay rate: minus the slope of `log norm` against `K`.
    pub c_hat: Interval,
    pub decays: bool,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(FieldError::Domain(format!("alpha must lie in (1, 2], got {alpha}")));
    }
    Ok(())
}

fn norm(r: &[f64], alpha: f64) -> f64 {
    let p: Vec<f64> = r.iter().map(|v| v.powf(alpha)).collect();
    mean(&p).powf(1.0 / alpha)
}

fn slope_of(ks: &[f64], norms: &[f64]) -> f64 {
    let y: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    ols(ks, &y).map_or(f64::NAN, |f| -f.slope)
}

/// Fits the decay of the norm from per-`K` ratio samples. The 99% interval on
/// `c_hat` comes from resampling replicas independently at each `K`.
pub fn condition_t_fit(ks: &[u32], ratios: &[Vec<f64>], alpha: f64, resamples: usize, seed: u64) -> Result<(Vec<f64>, Interval)> {
    check_alpha(alpha)?;
    if ks.len() != ratios.len() || ks.len() < 2 {
        return Err(FieldError::Domain("decay fit needs ratio samples at two or more block scales".into()));
    }
    let kf: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    let norms: Vec<f64> = ratios.iter().map(|r| norm(r, alpha)).collect();
    let c = slope_of(&kf, &norms);
    let groups: Vec<&[f64]> = ratios.iter().map(|r| r.as_slice()).collect();
    let ci = bootstrap_groups(&groups, resamples, seed, c, |picks| {
        let bn: Vec<f64> = picks.iter().map(|r| norm(r, alpha)).collect();
        slope_of(&kf, &bn)
    });
    Ok((norms, ci))
}

/// Samples `psi_{0,K+offset}` and its coarse part `psi_{0,K}` from one noise,
/// crosses the unit square and evaluates the ratio for each `K`.
pub fn condition_t_norm(cfg: &ConditionTConfig, seed: u64) -> Result<ConditionTReport> {
    check_alpha(cfg.alpha)?;
    if cfg.replicas < MIN_REPLICAS {
        return Err(FieldError::Config(format!("replicas must be >= {MIN_REPLICAS}, got {}", cfg.replicas)));
    }
    let rect = Rect::unit();
    let mut rows = Vec::new();
    let mut all = Vec::new();
    for &k in &cfg.ks {
        let n = (k + cfg.n_offset) as f64;
        let grid = GridSpec::for_scale(n, rect)?;
        let opts = SamplerOptions { mode: SliceMode::Independent, ..Default::default() };
        let sampler = Sampler::new(vec![KernelFamily::Truncated(cfg.trunc)], 0.0, n, grid, opts)?;
        let pairs: Vec<(f64, Option<f64>)> = (0..cfg.replicas)
            .into_par_iter()
            .map(|r| {
                let (mut full, mut coarse) = sampler.sample_split(derive_seed(seed, &[TAG_CT, k as u64, r as u64]), Some(k));
                let (field, coarse) = (full.swap_remove(0), coarse.swap_remove(0));
                let wg = build_weights(&field, cfg.xi, 1.0)?;
                let cr = crossing_with(&wg, &rect, Orientation::LeftRight, TieBreak::Lexicographic)?;
                let ratio = condition_t_ratio(&cr, &wg, &coarse, cfg.xi, k)?;
                let rev = if cfg.tie_sensitivity {
                    let cr2 = crossing_with(&wg, &rect, Orientation::LeftRight, TieBreak::Reversed)?;
                    Some(condition_t_ratio(&cr2, &wg, &coarse, cfg.xi, k)?)
                } else {
                    None
                };
                Ok((ratio, rev))
            })
            .collect::<Result<Vec<_>>>()?;
        let ratios: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let norm_reversed = if cfg.tie_sensitivity {
            Some(norm(&pairs.iter().map(|p| p.1.unwrap()).collect::<Vec<_>>(), cfg.alpha))
        } else {
            None
        };
        let nv = norm(&ratios, cfg.alpha);
        rows.push(ConditionTRow { k, n, norm: nv, log_norm: nv.ln(), mean_ratio: mean(&ratios), norm_reversed, replicas: ratios.len() });
        all.push(ratios);
    }
    let (_, c_hat) = condition_t_fit(&cfg.ks, &all, cfg.alpha, crate::stats::BOOTSTRAP, derive_seed(seed, &[TAG_CT]))?;
    Ok(ConditionTReport { alpha: cfg.alpha, xi: cfg.xi, rows, decays: c_hat.lo > 0.0, c_hat })
}
