//! Spectral synthesis of the Dirichlet GFF and its mollification.

use std::f64::consts::{PI, SQRT_2};

use lfpp_field::seed::rng;
use lfpp_field::{derive_seed, FieldError, FieldKind, FieldSample, GridSpec, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

const TAG_GFF: u64 = 0x0067_6666;

/// Modes damped below this factor are skipped during synthesis.
const NEGLIGIBLE: f64 = 1e-20;

/// `pi^2 (j^2 + k^2)`, the Dirichlet eigenvalue of mode `(j, k)`.
pub fn eigenvalue(j: usize, k: usize) -> f64 {
    PI * PI * ((j * j + k * k) as f64)
}

/// `sin(j pi a / m)` with `j a` reduced mod `2m`, so boundary nodes give exact zeros.
pub fn lattice_sine(j: usize, a: i64, m: u32) -> f64 {
    let m = m as i64;
    let r = (j as i64 * a).rem_euclid(2 * m);
    if r == 0 || r == m {
        0.0
    } else {
        (PI * r as f64 / m as f64).sin()
    }
}

/// Rows `j = 1..=modes` of `sqrt(2) sin(j pi x)` over `count` nodes from `origin`.
fn sine_table(modes: usize, origin: i64, count: usize, m: u32) -> Vec<f64> {
    let mut t = Vec::with_capacity(modes * count);
    for j in 1..=modes {
        t.extend((0..count).map(|i| SQRT_2 * lattice_sine(j, origin + i as i64, m)));
    }
    t
}

/// Sums `c_jk e_jk` over the grid nodes for the leading `active x active` block.
fn synthesize(coeffs: &[f64], modes: usize, active: usize, grid: &GridSpec) -> Vec<f64> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let (ox, oy) = grid.origin();
    let sx = sine_table(active, ox, nx, grid.m);
    let sy = sine_table(active, oy, ny, grid.m);
    // t[j][iy] = sum_k c_jk sy[k][iy]
    let mut t = vec![0.0; active * ny];
    for j in 0..active {
        let row = &mut t[j * ny..(j + 1) * ny];
        for k in 0..active {
            let c = coeffs[j * modes + k];
            if c != 0.0 {
                for (r, s) in row.iter_mut().zip(&sy[k * ny..(k + 1) * ny]) {
                    *r += c * s;
                }
            }
        }
    }
    let mut v = vec![0.0; nx * ny];
    for iy in 0..ny {
        let out = &mut v[iy * nx..(iy + 1) * nx];
        for j in 0..active {
            let c = t[j * ny + iy];
            for (o, s) in out.iter_mut().zip(&sx[j * nx..(j + 1) * nx]) {
                *o += c * s;
            }
        }
    }
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GffSample {
    /// Mode cutoff `M`: modes `1 <= j, k <= M` are kept.
    pub modes: usize,
    pub grid: GridSpec,
    /// `g_jk sqrt(normalization / lambda_jk)`, row-major in `(j, k)`.
    pub coeffs: Vec<f64>,
    /// Node values, row-major in `y`.
    pub values: Vec<f64>,
    /// Factor in front of the Green function: `2 pi`.
    pub normalization: f64,
    pub seed: u64,
}

fn check_grid(modes: usize, grid: &GridSpec) -> Result<()> {
    let r = grid.rect;
    if r.x0 < 0.0 || r.y0 < 0.0 || r.x1 > 1.0 || r.y1 > 1.0 {
        return Err(FieldError::Domain(format!("grid {r:?} leaves the unit square")));
    }
    if modes < 4 * grid.m as usize {
        return Err(FieldError::Config(format!("mode cutoff {modes} does not resolve the grid (need >= {})", 4 * grid.m)));
    }
    Ok(())
}

impl GffSample {
    /// Builds a sample from explicit coefficients (row-major, `modes^2` entries).
    pub fn from_coefficients(modes: usize, grid: GridSpec, coeffs: Vec<f64>, seed: u64) -> Result<Self> {
        check_grid(modes, &grid)?;
        if coeffs.len() != modes * modes {
            return Err(FieldError::Config(format!("{} coefficients for {modes}^2 modes", coeffs.len())));
        }
        let values = synthesize(&coeffs, modes, modes, &grid);
        Ok(GffSample { modes, grid, coeffs, values, normalization: 2.0 * PI, seed })
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx() + i]
    }
}

/// `h = sum_{j,k <= M} g_jk sqrt(2 pi / lambda_jk) e_jk` with
/// `e_jk(x) = 2 sin(j pi x_1) sin(k pi x_2)`.
pub fn sample_gff(modes: usize, grid: &GridSpec, seed: u64) -> Result<GffSample> {
    check_grid(modes, grid)?;
    let mut r = rng(derive_seed(seed, &[TAG_GFF]));
    let mut coeffs = Vec::with_capacity(modes * modes);
    for j in 1..=modes {
        for k in 1..=modes {
            let g: f64 = r.sample(StandardNormal);
            coeffs.push(g * (2.0 * PI / eigenvalue(j, k)).sqrt());
        }
    }
    GffSample::from_coefficients(modes, *grid, coeffs, seed)
}

/// `p_{t/2} * h` for the odd extension of `h`: mode `(j, k)` is multiplied by
/// `exp(-t lambda_jk / 4)`. The result has `scale_hi = -log2(sqrt t)`.
pub fn mollify(h: &GffSample, t: f64) -> Result<FieldSample> {
    let floor = (2.0 * h.grid.h()).powi(2);
    if !(t.is_finite() && t >= floor) {
        return Err(FieldError::Domain(format!("mollifier time {t} below the aliasing guard {floor}")));
    }
    let m = h.modes;
    // Largest j with exp(-t pi^2 (j^2 + 1) / 4) above the cutoff.
    let active = ((4.0 * -NEGLIGIBLE.ln() / (t * PI * PI)).sqrt().ceil() as usize + 1).min(m);
    let mut damped = vec![0.0; m * m];
    for j in 1..=active {
        for k in 1..=active {
            let i = (j - 1) * m + (k - 1);
            damped[i] = h.coeffs[i] * (-t * eigenvalue(j, k) / 4.0).exp();
        }
    }
    let values = synthesize(&damped, m, active, &h.grid);
    FieldSample::new(h.grid, values, 0.0, -0.5 * t.log2(), FieldKind::GffMollified, h.seed)
}

/// `2 pi sum_{j,k <= M} exp(-t lambda_jk / 2) e_jk(x) e_jk(y) / lambda_jk`:
/// the covariance of `p_{t/2} * h` (of `h` itself for `t = 0`).
pub fn series_covariance(modes: usize, t: f64, x: (f64, f64), y: (f64, f64)) -> f64 {
    let s = |j: usize, v: f64| SQRT_2 * (j as f64 * PI * v).sin();
    let mut acc = 0.0;
    for j in 1..=modes {
        let a = s(j, x.0) * s(j, y.0);
        for k in 1..=modes {
            let l = eigenvalue(j, k);
            acc += (-t * l / 2.0).exp() * a * s(k, x.1) * s(k, y.1) / l;
        }
    }
    2.0 * PI * acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use lfpp_field::Rect;

    #[test]
    fn lattice_sine_exact_zeros() {
        for j in 1..50 {
            assert_eq!(lattice_sine(j, 0, 16), 0.0);
            assert_eq!(lattice_sine(j, 16, 16), 0.0);
        }
        assert!((lattice_sine(3, 5, 16) - (3.0 * 5.0 * PI / 16.0).sin()).abs() < 1e-15);
    }

    #[test]
    fn cutoff_guard() {
        let g = GridSpec::new(16, Rect::unit()).unwrap();
        assert!(matches!(sample_gff(63, &g, 1), Err(FieldError::Config(_))));
        assert!(sample_gff(64, &g, 1).is_ok());
        let off = GridSpec::new(16, Rect::new(0.5, 0.0, 1.5, 1.0)).unwrap();
        assert!(matches!(sample_gff(64, &off, 1), Err(FieldError::Domain(_))));
    }
}
