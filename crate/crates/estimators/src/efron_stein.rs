//! Efron-Stein bound for `log L` of the unit square under `psi_{0,n}`:
//!
//! ```text
//! Var log L <= E[(log L^K - log L)_+^2] + sum_P E[(log L^P - log L)_+^2]
//! ```
//!
//! where `L^K` resamples the coarse field `psi_{0,K}` and `L^P` the fine noise
//! of block `P`. Blocks whose field window meets the geodesic are always
//! resampled; the others are included with probability `pi_other` and
//! reweighted by `1 / pi_other` (Horvitz-Thompson), which keeps the block sum
//! unbiased. For such a block the old geodesic keeps its length, so its term
//! is in fact exactly zero.

use lfpp_field::seed::rng;
use lfpp_field::{derive_seed, resample_component, Component, FieldError, FieldSample, GridSpec, LedgerSampler, Rect, Result, SamplerOptions, SliceMode, TruncationParams};
use lfpp_metric::{build_weights, crossing, Orientation};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mc::MIN_REPLICAS;
use crate::stats::{mean, mean_se, variance, variance_se};

const TAG_ES: u64 = 0x6573_7465;
const TAG_SELECT: u64 = 1;
const TAG_COARSE: u64 = 2;
const TAG_BLOCK: u64 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfronSteinConfig {
    pub n: f64,
    pub k: u32,
    pub xi: f64,
    pub trunc: TruncationParams,
    pub replicas: usize,
    /// Independent resamples per component, averaged.
    pub resamples_per_replica: usize,
    /// Inclusion probability of blocks away from the geodesic.
    pub pi_other: f64,
}

impl EfronSteinConfig {
    pub fn new(n: f64, k: u32, xi: f64, replicas: usize) -> Self {
        EfronSteinConfig { n, k, xi, trunc: TruncationParams::default(), replicas, resamples_per_replica: 1, pi_other: 0.25 }
    }
}

/// Per-replica contributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicaTerms {
    pub log_l: f64,
    pub coarse: f64,
    pub block_sum: f64,
    /// Blocks actually resampled.
    pub evaluated: usize,
    /// Blocks whose window meets the geodesic.
    pub near: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfronSteinReport {
    pub n: f64,
    pub k: u32,
    pub xi: f64,
    pub replicas: usize,
    pub coarse_term: f64,
    pub coarse_se: f64,
    pub block_sum_term: f64,
    pub block_se: f64,
    pub var_log: f64,
    pub var_se: f64,
    /// Standard error of `var_log - coarse_term - block_sum_term`.
    pub gap_se: f64,
    pub holds: bool,
    pub blocks_total: usize,
    pub mean_evaluated: f64,
    pub mean_near: f64,
}

/// `(new - old)_+^2`.
pub fn positive_part_sq(new_log: f64, old_log: f64) -> f64 {
    let d = (new_log - old_log).max(0.0);
    d * d
}

fn log_crossing(field: &FieldSample, xi: f64, rect: &Rect) -> Result<(f64, Vec<(u32, u32)>)> {
    let wg = build_weights(field, xi, 1.0)?;
    let cr = crossing(&wg, rect, Orientation::LeftRight)?;
    Ok((cr.length.ln(), cr.geodesic))
}

/// Efron-Stein terms of one ledger sample.
pub fn efron_stein_replica(
    field: &FieldSample,
    xi: f64,
    rect: &Rect,
    resamples: usize,
    pi_other: f64,
    seed: u64,
) -> Result<ReplicaTerms> {
    let ledger = field.ledger().ok_or_else(|| FieldError::State("Efron-Stein needs a field with a noise ledger".into()))?;
    if !(pi_other > 0.0 && pi_other <= 1.0) {
        return Err(FieldError::Config(format!("inclusion probability must lie in (0, 1], got {pi_other}")));
    }
    let resamples = resamples.max(1);
    let (log_l, geo) = log_crossing(field, xi, rect)?;
    let term = |c: Component, tag: u64, code: u64| -> Result<f64> {
        let mut acc = 0.0;
        for j in 0..resamples {
            let f = resample_component(field, c, derive_seed(seed, &[tag, code, j as u64]))?;
            acc += positive_part_sq(log_crossing(&f, xi, rect)?.0, log_l);
        }
        Ok(acc / resamples as f64)
    };
    let coarse = term(Component::Coarse, TAG_COARSE, 0)?;
    let mut select = rng(derive_seed(seed, &[TAG_SELECT]));
    let mut block_sum = 0.0;
    let (mut evaluated, mut near) = (0usize, 0usize);
    for (idx, b) in ledger.blocks().into_iter().enumerate() {
        let (x0, y0, nx, ny) = ledger.block_extent(b).expect("listed block");
        let meets = geo.iter().any(|&(i, j)| {
            let (i, j) = (i as usize, j as usize);
            i >= x0 && i < x0 + nx && j >= y0 && j < y0 + ny
        });
        let draw: f64 = select.random();
        let weight = if meets {
            near += 1;
            1.0
        } else if draw < pi_other {
            1.0 / pi_other
        } else {
            continue;
        };
        evaluated += 1;
        block_sum += weight * term(Component::Block(b.0, b.1), TAG_BLOCK, idx as u64)?;
    }
    Ok(ReplicaTerms { log_l, coarse, block_sum, evaluated, near })
}

/// Monte Carlo estimate of both sides of the Efron-Stein inequality for the
/// unit square.
pub fn efron_stein_decompose(cfg: &EfronSteinConfig, seed: u64) -> Result<EfronSteinReport> {
    if !((cfg.k as f64) < cfg.n) {
        return Err(FieldError::Domain(format!("Efron-Stein needs K < n, got K={} n={}", cfg.k, cfg.n)));
    }
    if cfg.replicas < MIN_REPLICAS {
        return Err(FieldError::Config(format!("replicas must be >= {MIN_REPLICAS}, got {}", cfg.replicas)));
    }
    let rect = Rect::unit();
    let grid = GridSpec::for_scale(cfg.n, rect)?;
    let opts = SamplerOptions { mode: SliceMode::Independent, ..Default::default() };
    let sampler = LedgerSampler::new(cfg.n, cfg.k, grid, cfg.trunc, opts)?;
    let blocks_total = sampler.blocks().len();
    let terms: Vec<ReplicaTerms> = (0..cfg.replicas)
        .into_par_iter()
        .map(|r| {
            let s = derive_seed(seed, &[TAG_ES, r as u64]);
            let field = sampler.sample(s);
            efron_stein_replica(&field, cfg.xi, &rect, cfg.resamples_per_replica, cfg.pi_other, derive_seed(s, &[TAG_ES]))
        })
        .collect::<Result<Vec<_>>>()?;
    let logs: Vec<f64> = terms.iter().map(|t| t.log_l).collect();
    let coarse: Vec<f64> = terms.iter().map(|t| t.coarse).collect();
    let blocks: Vec<f64> = terms.iter().map(|t| t.block_sum).collect();
    let total: Vec<f64> = terms.iter().map(|t| t.coarse + t.block_sum).collect();
    let var_log = variance(&logs);
    let var_se = variance_se(&logs);
    let gap_se = (var_se * var_se + mean_se(&total).powi(2)).sqrt();
    let coarse_term = mean(&coarse);
    let block_sum_term = mean(&blocks);
    Ok(EfronSteinReport {
        n: cfg.n,
        k: cfg.k,
        xi: cfg.xi,
        replicas: cfg.replicas,
        coarse_term,
        coarse_se: mean_se(&coarse),
        block_sum_term,
        block_se: mean_se(&blocks),
        var_log,
        var_se,
        gap_se,
        holds: var_log <= coarse_term + block_sum_term + 3.0 * gap_se,
        blocks_total,
        mean_evaluated: mean(&terms.iter().map(|t| t.evaluated as f64).collect::<Vec<_>>()),
        mean_near: mean(&terms.iter().map(|t| t.near as f64).collect::<Vec<_>>()),
    })
}
