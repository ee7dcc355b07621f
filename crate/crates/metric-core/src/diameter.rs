use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use crate::dijkstra::{crossing, distance_map, Orientation};
use crate::weights::WeightGrid;
use lfpp_field::{FieldError, Rect, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterEstimate {
    /// Largest distance found from the landmarks; never above the true diameter.
    pub lower: f64,
    /// Chaining bound built from long-rectangle crossings.
    pub chaining: f64,
    pub landmarks: usize,
    pub note: String,
}

/// Landmark nodes: corners, side midpoints, centre, then an interior lattice.
fn landmark_nodes(wg: &WeightGrid, count: usize) -> Vec<(usize, usize)> {
    let (nx, ny) = (wg.nx() - 1, wg.ny() - 1);
    let mut v = vec![(0, 0), (nx, 0), (0, ny), (nx, ny), (nx / 2, 0), (nx / 2, ny), (0, ny / 2), (nx, ny / 2), (nx / 2, ny / 2)];
    let mut q = 2;
    while v.len() < count {
        for a in 1..q {
            for b in 1..q {
                let p = (nx * a / q, ny * b / q);
                if !v.contains(&p) {
                    v.push(p);
                }
            }
        }
        q *= 2;
        if q > nx.max(ny) {
            break;
        }
    }
    v.truncate(count);
    v
}

/// `4 sum_{k=0}^{n} max_{P in C_k} L(P) + 2 sqrt 2 2^-n max w`, where `C_k` holds the
/// rectangles `2^-k (3, 1)` and `2^-k (1, 3)` on the dyadic lattice of the grid
/// domain (clipped to it), each crossed the long way.
pub fn chaining_surrogate(wg: &WeightGrid, n: u32) -> Result<f64> {
    let dom = wg.grid.rect;
    let mut total = 0.0;
    for k in 0..=n {
        let s = 2f64.powi(-(k as i32));
        if s * wg.grid.m as f64 + 1e-9 < 1.0 {
            return Err(FieldError::Config(format!("grid too coarse for chaining scale {k}")));
        }
        let (cx, cy) = ((dom.width() / s).round() as i64, (dom.height() / s).round() as i64);
        let mut best = 0.0f64;
        for a in 0..cx {
            for b in 0..cy {
                let (x0, y0) = (dom.x0 + a as f64 * s, dom.y0 + b as f64 * s);
                let horiz = Rect::new(x0, y0, (x0 + 3.0 * s).min(dom.x1), y0 + s);
                best = best.max(crossing(wg, &horiz, Orientation::LeftRight)?.length);
                let vert = Rect::new(x0, y0, x0 + s, (y0 + 3.0 * s).min(dom.y1));
                best = best.max(crossing(wg, &vert, Orientation::TopBottom)?.length);
            }
        }
        total += best;
    }
    let wmax = wg.weights.iter().cloned().fold(0.0, f64::max);
    Ok(4.0 * total + 2.0 * SQRT_2 * 2f64.powi(-(n as i32)) * wmax)
}

/// Landmark lower bound on the diameter plus the chaining surrogate at the
/// finest dyadic scale the grid resolves.
pub fn diameter_estimate(wg: &WeightGrid, landmarks: usize) -> Result<DiameterEstimate> {
    if landmarks < 4 {
        return Err(FieldError::Domain(format!("need at least 4 landmarks, got {landmarks}")));
    }
    let nodes = landmark_nodes(wg, landmarks);
    let mut lower = 0.0f64;
    for &p in &nodes {
        let d = distance_map(wg, p);
        lower = lower.max(d.iter().cloned().fold(0.0, f64::max));
    }
    let n = (wg.grid.m as f64).log2().floor() as u32;
    let n = n.saturating_sub(2);
    let chaining = chaining_surrogate(wg, n)?;
    Ok(DiameterEstimate {
        lower,
        chaining,
        landmarks: nodes.len(),
        note: format!("lower bound from {} single-source trees; chaining over scales 0..={n}", nodes.len()),
    })
}
