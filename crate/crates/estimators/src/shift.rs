//! Quantile shift under an independent Gaussian perturbation of the field.
//!
//! With `Psi` a constant-in-space centred Gaussian of variance `sigma2`, the
//! perturbed crossing is exactly `e^{xi Psi} L(Phi)`. The two inequalities
//! checked are
//!
//! ```text
//! ell(Phi + Psi, eps)        <= e^s ell(Phi, 2 eps)
//! bar-ell(Phi + Psi, 2 eps)  <= e^s bar-ell(Phi, eps)
//! ```
//!
//! with `s = sqrt(2 xi^2 sigma2 log(1/eps))`, the exponent variance being
//! `xi^2 sigma2` in the `e^{xi phi}` parametrization.

use lfpp_field::seed::rng;
use lfpp_field::{derive_seed, FieldError, Result};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::quantile::{quantile, quantile_sorted};
use crate::stats::bootstrap_indices;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftRow {
    pub eps: f64,
    pub factor: f64,
    /// `ell(Phi + Psi, eps)` and `e^s ell(Phi, 2 eps)`.
    pub lhs_low: f64,
    pub rhs_low: f64,
    /// `bar-ell(Phi + Psi, 2 eps)` and `e^s bar-ell(Phi, eps)`.
    pub lhs_high: f64,
    pub rhs_high: f64,
    /// Bootstrap standard errors of `lhs - rhs`.
    pub se_low: f64,
    pub se_high: f64,
    pub holds_low: bool,
    pub holds_high: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftReport {
    pub xi: f64,
    pub sigma2: f64,
    pub replicas: usize,
    pub rows: Vec<ShiftRow>,
    pub all_hold: bool,
}

/// `values[i] * e^{xi sigma Z_i}` with `Z_i` drawn from `derive_seed(seed, [i])`.
pub fn shifted_values(values: &[f64], xi: f64, sigma2: f64, seed: u64) -> Vec<f64> {
    let sd = xi * sigma2.sqrt();
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if sd == 0.0 {
                return v;
            }
            let z: f64 = StandardNormal.sample(&mut rng(derive_seed(seed, &[i as u64])));
            v * (sd * z).exp()
        })
        .collect()
}

fn sorted_at(x: &[f64], idx: &[usize]) -> Vec<f64> {
    let mut v: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Checks both inequalities at each `eps` on paired replicas of `L(Phi)`.
pub fn quantile_shift_check(base: &[f64], xi: f64, sigma2: f64, eps: &[f64], resamples: usize, seed: u64) -> Result<ShiftReport> {
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(FieldError::Domain(format!("sigma2 must be >= 0, got {sigma2}")));
    }
    if let Some(e) = eps.iter().find(|e| !(**e > 0.0 && **e < 0.5)) {
        return Err(FieldError::Domain(format!("eps must lie in (0, 1/2), got {e}")));
    }
    let shifted = shifted_values(base, xi, sigma2, derive_seed(seed, &[0]));
    let n = base.len();
    let mut rows = Vec::with_capacity(eps.len());
    for (k, &e) in eps.iter().enumerate() {
        let factor = (2.0 * xi * xi * sigma2 * (1.0 / e).ln()).sqrt().exp();
        let lhs_low = quantile(&shifted, e)?;
        let rhs_low = factor * quantile(base, 2.0 * e)?;
        let lhs_high = quantile(&shifted, 1.0 - 2.0 * e)?;
        let rhs_high = factor * quantile(base, 1.0 - e)?;
        let diff = |idx: &[usize], low: bool| {
            let s = sorted_at(&shifted, idx);
            let b = sorted_at(base, idx);
            if low {
                quantile_sorted(&s, e) - factor * quantile_sorted(&b, 2.0 * e)
            } else {
                quantile_sorted(&s, 1.0 - 2.0 * e) - factor * quantile_sorted(&b, 1.0 - e)
            }
        };
        let (se_low, se_high) = if resamples > 0 {
            let bl = bootstrap_indices(n, resamples, derive_seed(seed, &[1, k as u64]), lhs_low - rhs_low, |i| diff(i, true));
            let bh = bootstrap_indices(n, resamples, derive_seed(seed, &[2, k as u64]), lhs_high - rhs_high, |i| diff(i, false));
            (bl.se, bh.se)
        } else {
            (0.0, 0.0)
        };
        rows.push(ShiftRow {
            eps: e,
            factor,
            lhs_low,
            rhs_low,
            lhs_high,
            rhs_high,
            se_low,
            se_high,
            holds_low: lhs_low <= rhs_low + 3.0 * se_low,
            holds_high: lhs_high <= rhs_high + 3.0 * se_high,
        });
    }
    let all_hold = rows.iter().all(|r| r.holds_low && r.holds_high);
    Ok(ShiftReport { xi, sigma2, replicas: n, rows, all_hold })
}
