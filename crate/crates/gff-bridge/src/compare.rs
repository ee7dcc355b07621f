//! Crossing laws of `U = [1/4, 3/4]^2` under the mollified GFF and under
//! `phi_{sqrt(delta)}`, each normalized by its own median.
//!
//! The two fields are sampled independently; only their laws are compared.

use lfpp_estimators::quantile::quantile;
use lfpp_estimators::tails::{tail_curve, TailFit, TailSide};
use lfpp_field::{derive_seed, sample_phi, FieldError, GridSpec, Rect, Result};
use lfpp_metric::{build_weights, crossing, Orientation};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gff::{mollify, sample_gff};

const TAG_CMP: u64 = 0x6366_6d70;

pub const QUANTILES: [f64; 3] = [0.1, 0.5, 0.9];

pub fn inner_domain() -> Rect {
    Rect::new(0.25, 0.25, 0.75, 0.75)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Gff,
    Phi,
}

impl Source {
    pub fn name(&self) -> &'static str {
        match self {
            Source::Gff => "gff",
            Source::Phi => "phi",
        }
    }
}

/// One row of `gff_compare.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub delta: f64,
    pub source: Source,
    pub quantile: f64,
    pub value: f64,
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaComparison {
    pub delta: f64,
    /// `phi_{0,n}` with `2^-n = sqrt(delta)`.
    pub n: f64,
    pub m: u32,
    pub modes: usize,
    /// Quantiles at `QUANTILES`, divided by the median.
    pub gff: [f64; 3],
    pub phi: [f64; 3],
    /// `max_p max(a / b, b / a)` over the normalized quantiles.
    pub ratio: f64,
    pub gff_lower_tail: Option<TailFit>,
    pub phi_lower_tail: Option<TailFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub xi: f64,
    pub replicas: usize,
    pub deltas: Vec<DeltaComparison>,
    pub rows: Vec<CompareRow>,
    pub max_ratio: f64,
}

fn lengths<F: Fn(u64) -> Result<lfpp_field::FieldSample> + Sync>(sample: F, xi: f64, replicas: usize, seed: u64) -> Result<Vec<f64>> {
    let u = inner_domain();
    (0..replicas)
        .into_par_iter()
        .map(|i| {
            let f = sample(derive_seed(seed, &[i as u64]))?;
            Ok(crossing(&build_weights(&f, xi, 1.0)?, &u, Orientation::LeftRight)?.length)
        })
        .collect()
}

fn quantiles(v: &[f64]) -> Result<[f64; 3]> {
    Ok([quantile(v, QUANTILES[0])?, quantile(v, QUANTILES[1])?, quantile(v, QUANTILES[2])?])
}

fn lower_tail(v: &[f64], median: f64) -> Option<TailFit> {
    tail_curve(v, median, TailSide::Lower).ok().and_then(|c| c.fit)
}

/// For each `delta`: left-right crossing lengths of `U` under `p_{delta/2} * h`
/// and under `phi_{0,n}` with `n = log2(1 / delta) / 2`, both on the unit-square
/// grid of resolution `2^(ceil(n) + 3)`, with GFF mode cutoff `4m`.
pub fn compare_crossing_laws(deltas: &[f64], xi: f64, replicas: usize, seed: u64) -> Result<CompareReport> {
    if replicas < 16 {
        return Err(FieldError::Config(format!("replicas must be >= 16, got {replicas}")));
    }
    let mut out = Vec::new();
    let mut rows = Vec::new();
    for &delta in deltas {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(FieldError::Domain(format!("delta must lie in (0, 1), got {delta}")));
        }
        let n = -0.5 * delta.log2();
        let grid = GridSpec::for_scale(n + 1.0, Rect::unit())?;
        let modes = 4 * grid.m as usize;
        let tag = delta.to_bits();
        let gl = lengths(|s| mollify(&sample_gff(modes, &grid, s)?, delta), xi, replicas, derive_seed(seed, &[TAG_CMP, tag, 0]))?;
        let pl = lengths(|s| sample_phi(0.0, n, &grid, s), xi, replicas, derive_seed(seed, &[TAG_CMP, tag, 1]))?;
        let (gq, pq) = (quantiles(&gl)?, quantiles(&pl)?);
        let gn = gq.map(|q| q / gq[1]);
        let pn = pq.map(|q| q / pq[1]);
        let ratio = gn.iter().zip(&pn).map(|(a, b)| (a / b).max(b / a)).fold(1.0, f64::max);
        for (i, &p) in QUANTILES.iter().enumerate() {
            rows.push(CompareRow { delta, source: Source::Gff, quantile: p, value: gq[i], normalized: gn[i] });
            rows.push(CompareRow { delta, source: Source::Phi, quantile: p, value: pq[i], normalized: pn[i] });
        }
        out.push(DeltaComparison {
            delta,
            n,
            m: grid.m,
            modes,
            gff: gn,
            phi: pn,
            ratio,
            gff_lower_tail: lower_tail(&gl, gq[1]),
            phi_lower_tail: lower_tail(&pl, pq[1]),
        });
    }
    let max_ratio = out.iter().map(|d| d.ratio).fold(1.0, f64::max);
    Ok(CompareReport { xi, replicas, deltas: out, rows, max_ratio })
}
