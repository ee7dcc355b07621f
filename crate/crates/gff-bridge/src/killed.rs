//! Heat kernel killed outside `D = [0, 1]^2` and its comparison with the free
//! kernel after smoothing.
//!
//! Times are Brownian times: `killed_kernel(r, x, y)` is the density at `y` of
//! a Brownian motion started at `x`, run for time `r` and killed on leaving
//! `D`. The kernel `p^D_{s/2}` of the comparison is `killed_kernel(s / 2, ..)`.

use std::f64::consts::PI;

use lfpp_estimators::stats::ols;
use lfpp_field::quad::integrate_breaks;
use lfpp_field::{FieldError, Result};
use serde::{Deserialize, Serialize};

/// Smallest `s` accepted by the gap computation.
pub const S_MIN: f64 = 1e-3;

/// Series terms are dropped once `exp(-r pi^2 j^2 / 2)` falls below this.
const SERIES_TOL: f64 = 1e-17;

const QUAD_REL: f64 = 1e-12;
const QUAD_ABS: f64 = 1e-15;

fn gauss(var: f64, z: f64) -> f64 {
    (-z * z / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

fn terms(r: f64) -> usize {
    (2.0 * -SERIES_TOL.ln() / (r * PI * PI)).sqrt().ceil() as usize + 1
}

/// `sum_j 2 sin(j pi a) sin(j pi b) exp(-r pi^2 j^2 / 2)` on `(0, 1)`.
pub fn killed_kernel_1d(r: f64, a: f64, b: f64) -> f64 {
    (1..=terms(r))
        .map(|j| {
            let jf = j as f64;
            2.0 * (jf * PI * a).sin() * (jf * PI * b).sin() * (-r * PI * PI * jf * jf / 2.0).exp()
        })
        .sum()
}

/// Killed kernel on the square, a product of two interval kernels.
pub fn killed_kernel(r: f64, x: (f64, f64), y: (f64, f64)) -> f64 {
    killed_kernel_1d(r, x.0, y.0) * killed_kernel_1d(r, x.1, y.1)
}

/// One axis of `p_{t/2} * p^D_{s/2}`:
/// `int_0^1 g_{t/2}(x - z) k_{s/2}(z, y) dz = sum_j 2 e^{-s pi^2 j^2 / 4} sin(j pi y) I_j(x)`
/// with `I_j(x) = int_0^1 g_{t/2}(x - z) sin(j pi z) dz`.
fn smoothed_1d(t: f64, s: f64, x: f64, y: f64) -> Result<f64> {
    let var = t / 2.0;
    let sd = var.sqrt();
    let mut breaks = vec![0.0, 1.0];
    for k in [-6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0] {
        let b = x + k * sd;
        if b > 0.0 && b < 1.0 {
            breaks.push(b);
        }
    }
    breaks.sort_by(f64::total_cmp);
    let mut acc = 0.0;
    for j in 1..=terms(s / 2.0) {
        let jf = j as f64;
        let ij = integrate_breaks(|z| gauss(var, x - z) * (jf * PI * z).sin(), &breaks, QUAD_REL, QUAD_ABS)?;
        acc += 2.0 * (-s * PI * PI * jf * jf / 4.0).exp() * (jf * PI * y).sin() * ij;
    }
    Ok(acc)
}

/// `(p_{t/2} * p^D_{s/2})(x, y)` on the square.
pub fn smoothed_killed(t: f64, s: f64, x: (f64, f64), y: (f64, f64)) -> Result<f64> {
    Ok(smoothed_1d(t, s, x.0, y.0)? * smoothed_1d(t, s, x.1, y.1)?)
}

fn in_inner(p: (f64, f64)) -> bool {
    (0.25..=0.75).contains(&p.0) && (0.25..=0.75).contains(&p.1)
}

/// `|p_{t/2} * p^D_{s/2}(x, y) - p_{(t+s)/2}(x - y)|` for `x, y` in `[1/4, 3/4]^2`.
pub fn killed_kernel_gap(t: f64, s: f64, x: (f64, f64), y: (f64, f64)) -> Result<f64> {
    if !(s >= S_MIN && s.is_finite()) {
        return Err(FieldError::Domain(format!("killed-kernel series refused for s = {s} < {S_MIN}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(FieldError::Domain(format!("smoothing time must be positive, got {t}")));
    }
    if !in_inner(x) || !in_inner(y) {
        return Err(FieldError::Domain(format!("points {x:?}, {y:?} must lie in [1/4, 3/4]^2")));
    }
    let free = gauss((t + s) / 2.0, x.0 - y.0) * gauss((t + s) / 2.0, x.1 - y.1);
    Ok((smoothed_killed(t, s, x, y)? - free).abs())
}

/// One row of `killed_kernel.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub t: f64,
    pub s: f64,
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapFit {
    pub rows: Vec<GapRow>,
    /// Rate in `log gap = a - c / s`.
    pub c: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Whether the gap decreases strictly as `s` decreases.
    pub decreasing: bool,
}

/// Gaps over `ss` and the least-squares fit of `log gap` against `1 / s`.
pub fn gap_decay_fit(t: f64, ss: &[f64], x: (f64, f64), y: (f64, f64)) -> Result<GapFit> {
    if ss.len() < 2 {
        return Err(FieldError::Config(format!("need at least two values of s, got {}", ss.len())));
    }
    let mut ss = ss.to_vec();
    ss.sort_by(|a, b| b.total_cmp(a));
    let rows = ss
        .iter()
        .map(|&s| Ok(GapRow { t, s, x, y, gap: killed_kernel_gap(t, s, x, y)? }))
        .collect::<Result<Vec<_>>>()?;
    if rows.iter().any(|r| !(r.gap > 0.0)) {
        return Err(FieldError::Domain("gap vanished to roundoff; use larger s".into()));
    }
    let inv: Vec<f64> = rows.iter().map(|r| 1.0 / r.s).collect();
    let lg: Vec<f64> = rows.iter().map(|r| r.gap.ln()).collect();
    let fit = ols(&inv, &lg).ok_or_else(|| FieldError::Domain("degenerate gap regression".into()))?;
    let decreasing = rows.windows(2).all(|w| w[1].gap < w[0].gap);
    Ok(GapFit { c: -fit.slope, intercept: fit.intercept, r2: fit.r2, decreasing, rows })
}
