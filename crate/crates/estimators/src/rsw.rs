//! Hard/easy crossing quantile ratios across scales.
//!
//! The hard crossing is the long direction (`[0,3] x [0,1]` left-right), the
//! easy one the short direction (`[0,1] x [0,3]` left-right). Per scale
//! `r_n = ell_hard(p/4) / ell_easy(p)` and, for high quantiles,
//! `rbar_n = bar-ell_hard(p/4) / bar-ell_easy(p)`.

use lfpp_field::{FieldError, Result};
use serde::{Deserialize, Serialize};

use crate::mc::SampleSet;
use crate::quantile::quantile;
use crate::stats::ols;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RswRow {
    pub n: f64,
    pub ell_hard: f64,
    pub ell_easy: f64,
    pub r: f64,
    pub bar_hard: f64,
    pub bar_easy: f64,
    pub rbar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RswReport {
    pub p: f64,
    pub rows: Vec<RswRow>,
    pub max_r: f64,
    pub min_r: f64,
    /// `max_r / min_r`.
    pub spread: f64,
    /// OLS slope of `r_n` against `n` (0 with a single scale).
    pub trend: f64,
    pub max_rbar: f64,
    pub min_rbar: f64,
}

/// Pairs the two families by scale; both must cover the same scales.
pub fn rsw_compare(easy: &[&SampleSet], hard: &[&SampleSet], p: f64) -> Result<RswReport> {
    if !(p > 0.0 && p < 0.5) {
        return Err(FieldError::Domain(format!("p must lie in (0, 1/2), got {p}")));
    }
    let mut e: Vec<&SampleSet> = easy.to_vec();
    let mut h: Vec<&SampleSet> = hard.to_vec();
    e.sort_by(|a, b| a.scale.total_cmp(&b.scale));
    h.sort_by(|a, b| a.scale.total_cmp(&b.scale));
    if e.is_empty() || e.len() != h.len() || e.iter().zip(&h).any(|(a, b)| a.scale != b.scale) {
        return Err(FieldError::Domain("easy and hard sample sets must share one scale grid".into()));
    }
    let mut rows = Vec::with_capacity(e.len());
    for (se, sh) in e.iter().zip(&h) {
        let ell_hard = quantile(&sh.values, p / 4.0)?;
        let ell_easy = quantile(&se.values, p)?;
        let bar_hard = quantile(&sh.values, 1.0 - p / 4.0)?;
        let bar_easy = quantile(&se.values, 1.0 - p)?;
        rows.push(RswRow { n: se.scale, ell_hard, ell_easy, r: ell_hard / ell_easy, bar_hard, bar_easy, rbar: bar_hard / bar_easy });
    }
    let rs: Vec<f64> = rows.iter().map(|r| r.r).collect();
    let rb: Vec<f64> = rows.iter().map(|r| r.rbar).collect();
    let ns: Vec<f64> = rows.iter().map(|r| r.n).collect();
    let max_r = rs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_r = rs.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(RswReport {
        p,
        max_r,
        min_r,
        spread: max_r / min_r,
        trend: ols(&ns, &rs).map_or(0.0, |f| f.slope),
        max_rbar: rb.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        min_rbar: rb.iter().cloned().fold(f64::INFINITY, f64::min),
        rows,
    })
}
