//! Supremum, scaled gradient and per-block oscillation of a sampled field.

use serde::{Deserialize, Serialize};

use crate::sampler::FieldSample;
use crate::{FieldError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldStats {
    /// `max |f|` over the grid.
    pub sup_abs: f64,
    /// `2^-n max |grad f|`.
    pub grad_sup: f64,
    /// `((bx, by), diam(P) max_P |grad f|)` for the blocks of side `2^-K` meeting the grid.
    pub osc_per_block: Vec<((i64, i64), f64)>,
}

/// Gradient norm at every node: central differences inside, one-sided on the edges.
pub fn gradient_norm(field: &FieldSample) -> Vec<f64> {
    let (nx, ny) = (field.nx(), field.ny());
    let h = field.grid.h();
    let v = &field.values;
    let mut out = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let gx = if nx < 2 {
                0.0
            } else if i == 0 {
                (v[j * nx + 1] - v[j * nx]) / h
            } else if i == nx - 1 {
                (v[j * nx + i] - v[j * nx + i - 1]) / h
            } else {
                (v[j * nx + i + 1] - v[j * nx + i - 1]) / (2.0 * h)
            };
            let gy = if ny < 2 {
                0.0
            } else if j == 0 {
                (v[nx + i] - v[i]) / h
            } else if j == ny - 1 {
                (v[j * nx + i] - v[(j - 1) * nx + i]) / h
            } else {
                (v[(j + 1) * nx + i] - v[(j - 1) * nx + i]) / (2.0 * h)
            };
            out[j * nx + i] = gx.hypot(gy);
        }
    }
    out
}

/// Block index of absolute node `a` along one axis; the closing edge joins the last block.
fn block_of(a: i64, m: i64, k: u32, hi: i64) -> i64 {
    let b = (a << k).div_euclid(m);
    if a == hi && (a << k).rem_euclid(m) == 0 {
        b - 1
    } else {
        b
    }
}

pub fn field_stats(field: &FieldSample, k: u32) -> FieldStats {
    let sup_abs = field.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let grad = gradient_norm(field);
    let scale = (-field.scale_hi * std::f64::consts::LN_2).exp();
    let grad_sup = scale * grad.iter().fold(0.0f64, |a, &v| a.max(v));
    let (nx, ny) = (field.nx(), field.ny());
    let (ox, oy) = field.grid.origin();
    let m = field.grid.m as i64;
    let (hx, hy) = (ox + nx as i64 - 1, oy + ny as i64 - 1);
    let mut per = std::collections::BTreeMap::new();
    for j in 0..ny {
        let by = block_of(oy + j as i64, m, k, hy);
        for i in 0..nx {
            let bx = block_of(ox + i as i64, m, k, hx);
            let e = per.entry((bx, by)).or_insert(0.0f64);
            *e = e.max(grad[j * nx + i]);
        }
    }
    let diam = std::f64::consts::SQRT_2 * (-(k as f64) * std::f64::consts::LN_2).exp();
    FieldStats { sup_abs, grad_sup, osc_per_block: per.into_iter().map(|(b, g)| (b, diam * g)).collect() }
}

/// `max |f - g|` over the shared grid.
pub fn sup_difference(f: &FieldSample, g: &FieldSample) -> Result<f64> {
    if !f.grid.same_nodes(&g.grid) {
        return Err(FieldError::Domain("sup_difference needs fields on the same grid".into()));
    }
    Ok(f.values.iter().zip(&g.values).fold(0.0f64, |a, (x, y)| a.max((x - y).abs())))
}
