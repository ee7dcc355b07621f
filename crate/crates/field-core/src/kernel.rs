//! Heat kernel, truncation bump, exact covariances and the time-slice schedule.

use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

use crate::quad;
use crate::{FieldError, Result};

/// Planar heat kernel `p_t(r) = exp(-r^2 / 2t) / (2 pi t)`.
pub fn heat_kernel(t: f64, r: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(FieldError::Domain(format!("heat kernel time must be positive, got {t}")));
    }
    Ok(heat_kernel_unchecked(t, r))
}

#[inline]
pub(crate) fn heat_kernel_unchecked(t: f64, r: f64) -> f64 {
    (-r * r / (2.0 * t)).exp() / (2.0 * PI * t)
}

#[inline]
fn g(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// Smooth radial cutoff: 1 on `[0, 1]`, 0 on `[2, inf)`.
pub fn bump(u: f64) -> f64 {
    if u <= 1.0 {
        1.0
    } else if u >= 2.0 {
        0.0
    } else {
        let a = g(2.0 - u);
        a / (a + g(u - 1.0))
    }
}

/// `int_{a^2}^{b^2} exp(-r^2 / 2t) / (2t) dt`, the covariance of `phi_{a,b}` at lag `r`.
///
/// Here `a` and `b` are spatial scales (`phi_{a,b}` integrates times in
/// `[a^2, b^2]`).
pub fn cov_phi(a: f64, b: f64, r: f64) -> Result<f64> {
    if !(a > 0.0 && a < b && b <= 1.0) || !(r >= 0.0) {
        return Err(FieldError::Domain(format!("cov_phi needs 0 < a < b <= 1 and r >= 0, got a={a}, b={b}, r={r}")));
    }
    cov_time_range(a * a, b * b, r)
}

/// Same integral with explicit time bounds `[t0, t1]`, no upper bound on `t1`.
pub fn cov_time_range(t0: f64, t1: f64, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Ok(0.5 * (t1 / t0).ln());
    }
    // In u = log t the integrand is exp(-r^2 e^{-u} / 2) / 2, a smooth step.
    let f = |u: f64| 0.5 * (-r * r * (-u).exp() / 2.0).exp();
    let (u0, u1) = (t0.ln(), t1.ln());
    // Breakpoints around the step at e^u ~ r^2 help the adaptive rule.
    let uc = (r * r).ln();
    let mut br = vec![u0];
    for d in [-6.0, -2.0, 0.0, 2.0] {
        let u = uc + d;
        if u > u0 && u < u1 {
            br.push(u);
        }
    }
    br.push(u1);
    quad::integrate_breaks(f, &br, 1e-12, 1e-300)
}

/// Parameters of the truncation `sigma_t = r0 sqrt(t) |log t|^eps0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationParams {
    pub r0: f64,
    pub eps0: f64,
}

impl Default for TruncationParams {
    fn default() -> Self {
        TruncationParams { r0: 0.05, eps0: 0.2 }
    }
}

impl TruncationParams {
    pub fn new(r0: f64, eps0: f64) -> Result<Self> {
        let p = TruncationParams { r0, eps0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r0 > 0.0 && self.r0.is_finite()) {
            return Err(FieldError::Config(format!("r0 must be positive, got {}", self.r0)));
        }
        if !(self.eps0 > 0.0 && self.eps0 < 0.5) {
            return Err(FieldError::Config(format!("eps0 must lie in (0, 1/2), got {}", self.eps0)));
        }
        Ok(())
    }

    pub fn sigma(&self, t: f64) -> f64 {
        self.r0 * t.sqrt() * t.ln().abs().powf(self.eps0)
    }

    /// `sup_{t in (0,1]} sqrt(t) |log t|^eps0`, attained at `log t = -2 eps0`.
    pub fn sup_profile(&self) -> f64 {
        let e = self.eps0;
        (-e).exp() * (2.0 * e).powf(e)
    }

    /// Dependence range `8 r0 sup_t sqrt(t) |log t|^eps0`.
    pub fn finite_range(&self) -> f64 {
        8.0 * self.r0 * self.sup_profile()
    }

    /// Support radius of the truncated kernel at time `t`.
    pub fn support(&self, t: f64) -> f64 {
        2.0 * self.sigma(t)
    }
}

/// Kernel `sqrt(pi) p_{t/2}(r)` optionally multiplied by the truncation bump.
#[inline]
pub(crate) fn slice_kernel(t: f64, r: f64, trunc: Option<&TruncationParams>) -> f64 {
    let base = PI.sqrt() * heat_kernel_unchecked(t / 2.0, r);
    match trunc {
        None => base,
        Some(tp) => {
            let s = tp.sigma(t);
            if s <= 0.0 {
                0.0
            } else {
                base * bump(r / s)
            }
        }
    }
}

/// Radius beyond which the mass of `p_{t/2}` is below `1e-6`.
pub fn gaussian_padding(t: f64) -> f64 {
    (t * (1e6f64).ln()).sqrt()
}

/// One time slice `[lo, hi]`. The kernel is evaluated at the log midpoint
/// `t_mid` and weighted by `dt = t_mid log(hi / lo)`, the midpoint rule in
/// `log t`, so each slice carries exactly its share of the pointwise variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slice {
    pub lo: f64,
    pub hi: f64,
    pub t_mid: f64,
    pub dt: f64,
}

/// Time octaves covering `[2^{-2n}, 2^{-2k}]`, each split into `s` log-uniform slices.
///
/// Octave `j` is `[2^{-2(j+1)}, 2^{-2j}]` intersected with the requested range,
/// so fractional `k` and `n` shorten the first and last octaves.
pub fn octave_schedule(k: f64, n: f64, s: usize) -> Vec<(i32, Vec<Slice>)> {
    let mut out = Vec::new();
    if !(n > k) || s == 0 {
        return out;
    }
    let j0 = k.floor() as i32;
    let j1 = n.ceil() as i32;
    for j in j0..j1 {
        let lo_scale = (j as f64).max(k);
        let hi_scale = ((j + 1) as f64).min(n);
        if hi_scale <= lo_scale {
            continue;
        }
        let t_hi = (-2.0 * lo_scale * LN_2).exp();
        let t_lo = (-2.0 * hi_scale * LN_2).exp();
        let q = (t_hi / t_lo).ln() / s as f64;
        let slices = (0..s)
            .map(|i| {
                let a = t_lo * (q * i as f64).exp();
                let b = t_lo * (q * (i + 1) as f64).exp();
                let t_mid = (a * b).sqrt();
                Slice { lo: a, hi: b, t_mid, dt: t_mid * q }
            })
            .collect();
        out.push((j, slices));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_shape() {
        assert_eq!(bump(0.0), 1.0);
        assert_eq!(bump(2.5), 0.0);
        assert!((bump(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = bump(1.0 + i as f64 / 100.0);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn schedule_covers_range() {
        let sched = octave_schedule(0.0, 3.0, 8);
        assert_eq!(sched.len(), 3);
        let total: f64 = sched.iter().flat_map(|(_, s)| s.iter()).map(|s| s.hi - s.lo).sum();
        assert!((total - (1.0 - 2f64.powi(-6))).abs() < 1e-12);
        let frac = octave_schedule(0.0, 2.5, 4);
        assert_eq!(frac.len(), 3);
        let last: f64 = frac[2].1.iter().map(|s| s.hi - s.lo).sum();
        assert!((last - (2f64.powi(-4) - 2f64.powi(-5))).abs() < 1e-15);
    }

    #[test]
    fn slice_variance_is_exact() {
        // Each slice contributes dt / (2 t_mid) = log(hi / lo) / 2.
        let sched = octave_schedule(0.0, 2.5, 8);
        let v: f64 = sched.iter().flat_map(|(_, s)| s.iter()).map(|s| s.dt / (2.0 * s.t_mid)).sum();
        assert!((v / (2.5 * LN_2) - 1.0).abs() < 1e-13);
    }
}
