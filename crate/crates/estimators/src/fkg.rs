//! Positive association of crossing events: `P(L1 > x1, L2 > x2)` against
//! `P(L1 > x1) P(L2 > x2)`.

use lfpp_field::{derive_seed, FieldError, FieldSample, GridSpec, Rect, Result};
use lfpp_metric::{build_weights, crossing, Orientation};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mc::{FieldModel, MIN_REPLICAS};
use crate::quantile::quantile;
use crate::stats::{mean, variance};

const TAG_FKG: u64 = 0x666b_67;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FkgConfig {
    pub model: FieldModel,
    pub xi: f64,
    pub scale: f64,
    /// Left-right crossings of these rectangles.
    pub rects: [Rect; 2],
    /// Thresholds `x1, x2`; the empirical medians when absent.
    pub thresholds: Option<[f64; 2]>,
    pub replicas: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FkgReport {
    pub thresholds: [f64; 2],
    pub p1: f64,
    pub p2: f64,
    pub joint: f64,
    pub product: f64,
    /// Standard error of `joint - product` (delta method).
    pub se: f64,
    pub holds: bool,
    pub replicas: usize,
}

/// Joint and product probabilities from paired replicas.
pub fn fkg_from_values(a: &[f64], b: &[f64], thresholds: Option<[f64; 2]>) -> Result<FkgReport> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(FieldError::Domain("paired samples of equal length >= 2 required".into()));
    }
    let th = match thresholds {
        Some(t) => t,
        None => [quantile(a, 0.5)?, quantile(b, 0.5)?],
    };
    let i1: Vec<f64> = a.iter().map(|&v| (v > th[0]) as u8 as f64).collect();
    let i2: Vec<f64> = b.iter().map(|&v| (v > th[1]) as u8 as f64).collect();
    let i12: Vec<f64> = i1.iter().zip(&i2).map(|(x, y)| x * y).collect();
    let (p1, p2, joint) = (mean(&i1), mean(&i2), mean(&i12));
    let product = p1 * p2;
    // Influence function of joint - p1 p2.
    let infl: Vec<f64> = (0..a.len()).map(|i| i12[i] - p2 * i1[i] - p1 * i2[i]).collect();
    let se = (variance(&infl) / a.len() as f64).sqrt();
    Ok(FkgReport { thresholds: th, p1, p2, joint, product, se, holds: joint >= product - 3.0 * se, replicas: a.len() })
}

fn bounding(a: &Rect, b: &Rect) -> Rect {
    Rect::new(a.x0.min(b.x0), a.y0.min(b.y0), a.x1.max(b.x1), a.y1.max(b.y1))
}

/// Samples the field on the bounding box of both rectangles and crosses each.
pub fn fkg_check(cfg: &FkgConfig, seed: u64) -> Result<FkgReport> {
    if cfg.replicas < MIN_REPLICAS {
        return Err(FieldError::Config(format!("replicas must be >= {MIN_REPLICAS}, got {}", cfg.replicas)));
    }
    let domain = bounding(&cfg.rects[0], &cfg.rects[1]);
    let grid = GridSpec::for_scale(cfg.scale, domain)?;
    let sampler = if cfg.xi == 0.0 { None } else { Some(cfg.model.sampler(cfg.scale, grid)?) };
    let pairs: Vec<(f64, f64)> = (0..cfg.replicas)
        .into_par_iter()
        .map(|i| {
            let s = derive_seed(seed, &[TAG_FKG, i as u64]);
            let field = match &sampler {
                Some(sm) => sm.sample(s),
                None => FieldSample::constant(grid, 0.0),
            };
            let wg = build_weights(&field, cfg.xi, 1.0)?;
            let l1 = crossing(&wg, &cfg.rects[0], Orientation::LeftRight)?.length;
            let l2 = crossing(&wg, &cfg.rects[1], Orientation::LeftRight)?.length;
            Ok((l1, l2))
        })
        .collect::<Result<Vec<_>>>()?;
    let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    fkg_from_values(&a, &b, cfg.thresholds)
}
