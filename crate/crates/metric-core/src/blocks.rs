use crate::dijkstra::CrossingResult;
use crate::weights::WeightGrid;
use lfpp_field::{FieldError, FieldSample, Result};

fn block_range(lo: f64, hi: f64, k: u32) -> (i64, i64) {
    let s = (1u64 << k) as f64;
    ((lo * s + 1e-9).floor() as i64, (hi * s - 1e-9).ceil() as i64 - 1)
}

/// Blocks of side `2^-K` met by the geodesic, in path order, consecutive blocks
/// sharing an edge. A diagonal step across a block corner adds the block
/// reached by moving in x first.
pub fn visited_block_path(cr: &CrossingResult, wg: &WeightGrid, k: u32) -> Vec<(i64, i64)> {
    let m = wg.grid.m as i64;
    let (ox, oy) = wg.grid.origin();
    let (bx0, bx1) = block_range(cr.rect.x0, cr.rect.x1, k);
    let (by0, by1) = block_range(cr.rect.y0, cr.rect.y1, k);
    let of = |i: u32, j: u32| {
        let bx = ((ox + i as i64) << k).div_euclid(m).clamp(bx0, bx1);
        let by = ((oy + j as i64) << k).div_euclid(m).clamp(by0, by1);
        (bx, by)
    };
    let mut out: Vec<(i64, i64)> = Vec::new();
    for &(i, j) in &cr.geodesic {
        let b = of(i, j);
        if let Some(&last) = out.last() {
            if last == b {
                continue;
            }
            if last.0 != b.0 && last.1 != b.1 {
                out.push((b.0, last.1));
            }
        }
        out.push(b);
    }
    out
}

/// Distinct blocks met by the geodesic, sorted.
pub fn visited_blocks(cr: &CrossingResult, wg: &WeightGrid, k: u32) -> Vec<(i64, i64)> {
    let mut v = visited_block_path(cr, wg, k);
    v.sort_unstable();
    v.dedup();
    v
}

/// Field values at the centres of the given blocks of side `2^-K`.
pub fn block_center_values(field: &FieldSample, blocks: &[(i64, i64)], k: u32) -> Vec<f64> {
    let s = 2f64.powi(-(k as i32));
    blocks.iter().map(|&(bx, by)| field.at_point((bx as f64 + 0.5) * s, (by as f64 + 0.5) * s)).collect()
}

/// `sum e^{2 xi v} / (sum e^{xi v})^2`, computed with a max shift for stability.
pub fn condition_t_ratio_from_values(values: &[f64], xi: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(FieldError::Domain("condition (T) ratio needs at least one block".into()));
    }
    let vmax = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (mut s1, mut s2) = (0.0, 0.0);
    for &v in values {
        let e = (xi * (v - vmax)).exp();
        s1 += e;
        s2 += e * e;
    }
    Ok(s2 / (s1 * s1))
}

/// Condition (T) ratio over the blocks visited by `cr`, with block values read
/// from the coarse field at block centres.
pub fn condition_t_ratio(cr: &CrossingResult, wg: &WeightGrid, coarse: &FieldSample, xi: f64, k: u32) -> Result<f64> {
    let blocks = visited_blocks(cr, wg, k);
    condition_t_ratio_from_values(&block_center_values(coarse, &blocks, k), xi)
}
