use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::dijkstra::distances_from;
use crate::weights::WeightGrid;
use lfpp_field::{derive_seed, FieldError, Result};

pub type PointPair = ((f64, f64), (f64, f64));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderRatios {
    /// `max |x - x'|^alpha / d(x, x')`.
    pub c_alpha: f64,
    /// `max d(x, x') / |x - x'|^beta`.
    pub c_beta: f64,
    /// Pair attaining `c_alpha`, with its Euclidean and metric distance.
    pub argmax_alpha: (PointPair, f64, f64),
    pub pairs: usize,
}

/// Node-aligned pairs stratified by separation `2^-k`, `k = 1..=n`: per stratum
/// `sources` random sources, each with `per_source` targets at random angles.
pub fn stratified_pairs(wg: &WeightGrid, n: u32, sources: usize, per_source: usize, seed: u64) -> Vec<PointPair> {
    let dom = wg.grid.rect;
    let h = wg.h();
    let mut out = Vec::new();
    for k in 1..=n {
        let r = 2f64.powi(-(k as i32));
        if r < 2.0 * h {
            continue;
        }
        let mut rng = lfpp_field::seed::rng(derive_seed(seed, &[k as u64]));
        let mut made = 0;
        let mut attempts = 0;
        while made < sources && attempts < 100 * sources {
            attempts += 1;
            let x = (dom.x0 + rng.random::<f64>() * dom.width(), dom.y0 + rng.random::<f64>() * dom.height());
            let xs = snap(wg, x);
            let mut targets = Vec::new();
            let mut tries = 0;
            while targets.len() < per_source && tries < 50 * per_source {
                tries += 1;
                let th = rng.random::<f64>() * std::f64::consts::TAU;
                let y = (xs.0 + r * th.cos(), xs.1 + r * th.sin());
                if y.0 < dom.x0 || y.0 > dom.x1 || y.1 < dom.y0 || y.1 > dom.y1 {
                    continue;
                }
                let ys = snap(wg, y);
                let sep = (ys.0 - xs.0).hypot(ys.1 - xs.1);
                if sep >= 2.0 * h {
                    targets.push(ys);
                }
            }
            if targets.len() == per_source {
                out.extend(targets.into_iter().map(|y| (xs, y)));
                made += 1;
            }
        }
    }
    out
}

fn snap(wg: &WeightGrid, p: (f64, f64)) -> (f64, f64) {
    let (i, j) = wg.grid.nearest(p.0, p.1);
    wg.grid.position(i, j)
}

/// Hölder-type constants over the given pairs; pairs sharing a source share one search.
pub fn holder_ratios(wg: &WeightGrid, alpha: f64, beta: f64, pairs: &[PointPair]) -> Result<HolderRatios> {
    if pairs.is_empty() {
        return Err(FieldError::Domain("holder_ratios needs at least one pair".into()));
    }
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(FieldError::Domain(format!("exponents must be positive, got alpha={alpha}, beta={beta}")));
    }
    let mut by_src: BTreeMap<(u64, u64), Vec<(f64, f64)>> = BTreeMap::new();
    for &(x, y) in pairs {
        by_src.entry((x.0.to_bits(), x.1.to_bits())).or_default().push(y);
    }
    let mut c_alpha = 0.0f64;
    let mut c_beta = 0.0f64;
    let mut arg = (pairs[0], 0.0, 0.0);
    for ((bx, by), ys) in &by_src {
        let x = (f64::from_bits(*bx), f64::from_bits(*by));
        let ds = distances_from(wg, x, ys);
        for (y, d) in ys.iter().zip(ds) {
            let e = (y.0 - x.0).hypot(y.1 - x.1);
            if e < 2.0 * wg.h() - 1e-12 {
                return Err(FieldError::Domain(format!("pair separation {e} below two grid cells")));
            }
            let a = e.powf(alpha) / d;
            if a > c_alpha {
                c_alpha = a;
                arg = ((x, *y), e, d);
            }
            c_beta = c_beta.max(d / e.powf(beta));
        }
    }
    Ok(HolderRatios { c_alpha, c_beta, argmax_alpha: arg, pairs: pairs.len() })
}
