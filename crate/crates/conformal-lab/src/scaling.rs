//! Dyadic scaling `phi_{a,b}(r .) = phi_{a/r,b/r}(.)` in law, checked on
//! matched grids through covariances and through crossing-length medians.

use lfpp_estimators::quantile::quantile;
use lfpp_estimators::stats::{bootstrap, mean, mean_se, Interval, BOOTSTRAP};
use lfpp_field::{cov_phi, derive_seed, FieldError, GridSpec, KernelFamily, Rect, Result, Sampler, SamplerOptions};
use lfpp_metric::{build_weights, crossing, Orientation};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const TAG_SCALE: u64 = 0x7363_616c;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    /// Dyadic ratio `r = 2^j`.
    pub r: u32,
    pub a: f64,
    pub b: f64,
    /// Resolution of the rescaled side; the original side uses `m / r`.
    pub m: u32,
    /// Window side of the rescaled side (the original side covers `r side`).
    pub side: f64,
    /// Lags in grid nodes along the first axis.
    pub lags: Vec<usize>,
    pub replicas: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    /// Lag `u` in rescaled units.
    pub lag: f64,
    /// Covariance of `phi_{a,b}(r x), phi_{a,b}(r (x + u))`.
    pub cov_scaled: f64,
    pub se_scaled: f64,
    /// Covariance of `phi_{a/r,b/r}` at lag `u`.
    pub cov_direct: f64,
    pub se_direct: f64,
    /// `cov_phi(a/r, b/r, u)`.
    pub oracle: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub r: u32,
    pub a: f64,
    pub b: f64,
    pub replicas: usize,
    pub rows: Vec<ScalingRow>,
    /// Whether both sides produced bit-identical samples (expected for `r = 1`).
    pub identical: bool,
    pub all_ok: bool,
}

fn sampler(a: f64, b: f64, m: u32, side: f64) -> Result<Sampler> {
    let grid = GridSpec::new(m, Rect::sized(side, side))?;
    Sampler::new(vec![KernelFamily::Heat], -b.log2(), -a.log2(), grid, SamplerOptions::default())
}

/// Samples `phi_{a,b}` on `[0, r side]^2` at resolution `m / r` and
/// `phi_{a/r,b/r}` on `[0, side]^2` at resolution `m`, so node `(i, j)` of one
/// is the image of node `(i, j)` of the other. Both sides use the same seeds.
pub fn coupled_scaling_check(cfg: &ScalingConfig, seed: u64) -> Result<ScalingReport> {
    let r = cfg.r;
    if r == 0 || !r.is_power_of_two() || cfg.m % r != 0 || cfg.m / r < 2 {
        return Err(FieldError::Config(format!("ratio {r} must be a power of two dividing m = {}", cfg.m)));
    }
    if !(cfg.a > 0.0 && cfg.a < cfg.b && cfg.b <= 1.0) {
        return Err(FieldError::Domain(format!("scales need 0 < a < b <= 1, got a={}, b={}", cfg.a, cfg.b)));
    }
    if cfg.replicas < 16 {
        return Err(FieldError::Config(format!("replicas must be >= 16, got {}", cfg.replicas)));
    }
    let rf = r as f64;
    // Both samplers check that a / r is resolved by their grids.
    let orig = sampler(cfg.a, cfg.b, cfg.m / r, rf * cfg.side)?;
    let resc = sampler(cfg.a / rf, cfg.b / rf, cfg.m, cfg.side)?;
    let (nx, ny) = (resc.grid().nx(), resc.grid().ny());
    let (i0, j0) = (nx / 2, ny / 2);
    if let Some(&l) = cfg.lags.iter().find(|&&l| i0 + l >= nx) {
        return Err(FieldError::Domain(format!("lag of {l} nodes leaves the {nx}-node window")));
    }
    let draws: Vec<(Vec<f64>, Vec<f64>, bool)> = (0..cfg.replicas)
        .into_par_iter()
        .map(|k| {
            let s = derive_seed(seed, &[TAG_SCALE, k as u64]);
            let (fa, fb) = (orig.sample(s), resc.sample(s));
            let pa = cfg.lags.iter().map(|&l| fa.at(i0, j0) * fa.at(i0 + l, j0)).collect();
            let pb = cfg.lags.iter().map(|&l| fb.at(i0, j0) * fb.at(i0 + l, j0)).collect();
            (pa, pb, fa.values == fb.values)
        })
        .collect();
    let mut rows = Vec::new();
    for (q, &l) in cfg.lags.iter().enumerate() {
        let pa: Vec<f64> = draws.iter().map(|d| d.0[q]).collect();
        let pb: Vec<f64> = draws.iter().map(|d| d.1[q]).collect();
        let u = l as f64 / cfg.m as f64;
        let oracle = cov_phi(cfg.a / rf, cfg.b / rf, u)?;
        let (ca, sa, cb, sb) = (mean(&pa), mean_se(&pa), mean(&pb), mean_se(&pb));
        let ok = (ca - oracle).abs() <= 3.0 * sa && (cb - oracle).abs() <= 3.0 * sb && (ca - cb).abs() <= 3.0 * sa.hypot(sb);
        rows.push(ScalingRow { lag: u, cov_scaled: ca, se_scaled: sa, cov_direct: cb, se_direct: sb, oracle, ok });
    }
    Ok(ScalingReport {
        r,
        a: cfg.a,
        b: cfg.b,
        replicas: cfg.replicas,
        all_ok: rows.iter().all(|r| r.ok),
        rows,
        identical: draws.iter().all(|d| d.2),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingScaleReport {
    pub m: u32,
    pub n: f64,
    pub xi: f64,
    pub replicas: usize,
    /// Median of `2^m L` for `phi_{m,n}` on the square of side `2^-m`.
    pub scaled: Interval,
    /// Median of `L` for `phi_{0,n-m}` on the unit square.
    pub direct: Interval,
    pub overlap: bool,
}

fn crossing_medians(k: f64, n: f64, rect: Rect, xi: f64, replicas: usize, seed: u64, factor: f64) -> Result<Interval> {
    let grid = GridSpec::for_scale(n, rect)?;
    let s = Sampler::new(vec![KernelFamily::Heat], k, n, grid, SamplerOptions::default())?;
    let vals = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let f = s.sample(derive_seed(seed, &[i as u64]));
            Ok(factor * crossing(&build_weights(&f, xi, 1.0)?, &rect, Orientation::LeftRight)?.length)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(bootstrap(&vals, BOOTSTRAP, derive_seed(seed, &[TAG_SCALE]), |v| quantile(v, 0.5).unwrap()))
}

/// Medians of `2^m L^{(m,n)}` over the square of side `2^-m` and of
/// `L^{(n-m)}` over the unit square, with 99% bootstrap intervals.
pub fn scaled_crossing_check(m: u32, n: f64, xi: f64, replicas: usize, seed: u64) -> Result<CrossingScaleReport> {
    if !(m as f64 <= n) {
        return Err(FieldError::Domain(format!("need m <= n, got m={m}, n={n}")));
    }
    if replicas < 16 {
        return Err(FieldError::Config(format!("replicas must be >= 16, got {replicas}")));
    }
    let side = 0.5f64.powi(m as i32);
    let scaled = crossing_medians(m as f64, n, Rect::sized(side, side), xi, replicas, derive_seed(seed, &[TAG_SCALE, 1]), 1.0 / side)?;
    let direct = crossing_medians(0.0, n - m as f64, Rect::unit(), xi, replicas, derive_seed(seed, &[TAG_SCALE, 2]), 1.0)?;
    Ok(CrossingScaleReport { m, n, xi, replicas, overlap: scaled.overlaps(&direct), scaled, direct })
}
