//! Lag and `delta` sweeps of the three terms and the `conformal.csv` rows.

use lfpp_field::Result;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::maps::ConformalMapSpec;
use crate::quadrature::{boundary_term_integral, kernel_gap_integral, third_term_variance, QuadOptions, QuadValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Term {
    First,
    Second,
    Third,
}

impl Term {
    pub fn name(&self) -> &'static str {
        match self {
            Term::First => "first",
            Term::Second => "second",
            Term::Third => "third",
        }
    }
}

/// One row of `conformal.csv`. For the third term `lag` holds `delta` and
/// `ratio` repeats the value (a pointwise variance is not normalized).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRow {
    pub map: String,
    pub term: Term,
    pub lag: f64,
    pub value: f64,
    pub ratio: f64,
    pub rel_change: f64,
    pub level: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSweep {
    pub map: String,
    pub term: Term,
    pub rows: Vec<TermRow>,
    pub max_ratio: f64,
    pub min_ratio: f64,
    /// `max_ratio / min_ratio`; 1 when every ratio is 0.
    pub spread: f64,
}

impl TermSweep {
    fn from_rows(map: &ConformalMapSpec, term: Term, rows: Vec<TermRow>) -> Self {
        let max_ratio = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
        let min_ratio = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        let spread = if max_ratio == 0.0 { 1.0 } else { max_ratio / min_ratio };
        TermSweep { map: map.id().to_string(), term, rows, max_ratio, min_ratio, spread }
    }
}

/// `2^-k` for `k = k_lo..=k_hi`.
pub fn dyadic(k_lo: i32, k_hi: i32) -> Vec<f64> {
    (k_lo..=k_hi).map(|k| 0.5f64.powi(k)).collect()
}

/// The pair `x, x'` straddling the domain center along the real axis.
pub fn lag_pair(map: &ConformalMapSpec, lag: f64) -> (Complex64, Complex64) {
    let c = map.center();
    (c - 0.5 * lag, c + 0.5 * lag)
}

fn row(map: &ConformalMapSpec, term: Term, lag: f64, q: QuadValue, ratio: f64) -> TermRow {
    TermRow { map: map.id().to_string(), term, lag, value: q.value, ratio, rel_change: q.rel_change, level: q.level }
}

/// First or second term over the given lags, normalized by the lag.
pub fn lag_sweep(map: &ConformalMapSpec, term: Term, lags: &[f64], opts: &QuadOptions) -> Result<TermSweep> {
    let mut rows = Vec::with_capacity(lags.len());
    for &lag in lags {
        let (x, xp) = lag_pair(map, lag);
        let q = match term {
            Term::First => kernel_gap_integral(map, x, xp, opts)?,
            Term::Second => boundary_term_integral(map, x, xp, opts)?,
            Term::Third => third_term_variance(map, x, lag, opts)?,
        };
        let ratio = if term == Term::Third { q.value } else { q.value / lag };
        rows.push(row(map, term, lag, q, ratio));
    }
    Ok(TermSweep::from_rows(map, term, rows))
}

/// Third term at the domain center over a `delta` grid.
pub fn delta_sweep(map: &ConformalMapSpec, deltas: &[f64], opts: &QuadOptions) -> Result<TermSweep> {
    lag_sweep(map, Term::Third, deltas, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalReport {
    pub map: ConformalMapSpec,
    /// Ball radius of case (a), computed from the derivative bounds.
    pub eps_case_a: f64,
    pub first: TermSweep,
    pub second: TermSweep,
    pub third: TermSweep,
}

impl ConformalReport {
    pub fn rows(&self) -> impl Iterator<Item = &TermRow> {
        self.first.rows.iter().chain(&self.second.rows).chain(&self.third.rows)
    }
}

pub fn conformal_report(map: &ConformalMapSpec, lags: &[f64], deltas: &[f64], opts: &QuadOptions) -> Result<ConformalReport> {
    Ok(ConformalReport {
        map: *map,
        eps_case_a: map.eps_case_a(map.center()),
        first: lag_sweep(map, Term::First, lags, opts)?,
        second: lag_sweep(map, Term::Second, lags, opts)?,
        third: delta_sweep(map, deltas, opts)?,
    })
}
