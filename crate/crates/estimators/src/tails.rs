//! Empirical tail curves `s -> log P(L <= lambda e^-s)` and
//! `s -> log P(L >= lambda e^s)` with their shape regressions.
//!
//! The lower side is regressed on `s^2`. The upper side is regressed on
//! `s^2 / log s` over `s > 2`, the range of the upper-tail bound (the abscissa
//! is not monotone below `e^{1/2}`); a decaying bound has a negative slope.

use lfpp_field::{FieldError, Result};
use serde::{Deserialize, Serialize};

use crate::stats::{wls, LinearFit};

/// Buckets with fewer hits are kept in the curve but left out of the fit.
pub const MIN_FIT_HITS: usize = 20;

/// Minimum sample size for a tail curve.
pub const MIN_TAIL_SAMPLES: usize = 200;

const DEFAULT_POINTS: usize = 24;

/// Smallest `s` entering the upper-side regression.
pub const UPPER_MIN_S: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailSide {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub s: f64,
    pub log_p: f64,
    pub hits: usize,
    /// Whether the point enters the shape regression.
    pub fitted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub slope_se: f64,
    pub points: usize,
}

impl From<LinearFit> for TailFit {
    fn from(f: LinearFit) -> Self {
        TailFit { slope: f.slope, intercept: f.intercept, r2: f.r2, slope_se: f.slope_se, points: f.points }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub side: TailSide,
    pub lambda_ref: f64,
    pub samples: usize,
    pub points: Vec<TailPoint>,
    /// Grid values with an empty bucket, omitted from `points`.
    pub omitted: Vec<f64>,
    pub fit: Option<TailFit>,
}

/// Regression abscissa for a side, `None` where it is undefined.
pub fn abscissa(side: TailSide, s: f64) -> Option<f64> {
    match side {
        TailSide::Lower => Some(s * s),
        TailSide::Upper => (s > UPPER_MIN_S).then(|| s * s / s.ln()),
    }
}

fn excesses(samples: &[f64], lambda_ref: f64, side: TailSide) -> Vec<f64> {
    let lr = lambda_ref.ln();
    samples
        .iter()
        .map(|v| match side {
            TailSide::Lower => lr - v.ln(),
            TailSide::Upper => v.ln() - lr,
        })
        .collect()
}

fn check(samples: &[f64], lambda_ref: f64) -> Result<()> {
    if samples.len() < MIN_TAIL_SAMPLES {
        return Err(FieldError::Domain(format!(
            "tail curve needs at least {MIN_TAIL_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if !(lambda_ref > 0.0 && lambda_ref.is_finite()) {
        return Err(FieldError::Domain(format!("reference length must be positive, got {lambda_ref}")));
    }
    if samples.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(FieldError::Domain("tail samples must be positive and finite".into()));
    }
    Ok(())
}

/// Default grid: `DEFAULT_POINTS` equally spaced values up to the largest
/// observed excess on that side (up to 1 when there is none).
pub fn default_grid(samples: &[f64], lambda_ref: f64, side: TailSide) -> Vec<f64> {
    let smax = excesses(samples, lambda_ref, side).into_iter().fold(0.0f64, f64::max);
    let top = if smax > 0.0 { smax } else { 1.0 };
    (1..=DEFAULT_POINTS).map(|i| top * i as f64 / DEFAULT_POINTS as f64).collect()
}

/// Tail curve on the default grid.
pub fn tail_curve(samples: &[f64], lambda_ref: f64, side: TailSide) -> Result<TailCurve> {
    check(samples, lambda_ref)?;
    let grid = default_grid(samples, lambda_ref, side);
    tail_curve_on(samples, lambda_ref, side, &grid)
}

/// Tail curve on an explicit grid of `s` values.
pub fn tail_curve_on(samples: &[f64], lambda_ref: f64, side: TailSide, grid: &[f64]) -> Result<TailCurve> {
    check(samples, lambda_ref)?;
    let ex = excesses(samples, lambda_ref, side);
    let n = samples.len() as f64;
    let mut points = Vec::new();
    let mut omitted = Vec::new();
    for &s in grid {
        let hits = ex.iter().filter(|&&e| e >= s).count();
        if hits == 0 {
            omitted.push(s);
            continue;
        }
        let fitted = hits >= MIN_FIT_HITS && abscissa(side, s).is_some();
        points.push(TailPoint { s, log_p: (hits as f64 / n).ln(), hits, fitted });
    }
    let used: Vec<&TailPoint> = points.iter().filter(|p| p.fitted).collect();
    let fit = if used.len() >= 3 {
        let x: Vec<f64> = used.iter().map(|p| abscissa(side, p.s).unwrap()).collect();
        let y: Vec<f64> = used.iter().map(|p| p.log_p).collect();
        let w: Vec<f64> = used.iter().map(|p| p.hits as f64).collect();
        wls(&x, &y, &w).map(TailFit::from)
    } else {
        None
    };
    Ok(TailCurve { side, lambda_ref, samples: samples.len(), points, omitted, fit })
}
