//! Tensor Gauss-Legendre quadrature of the three variance terms in the
//! decomposition `phi_delta - phi~_delta o F = dphi_1 + dphi_2 + dphi_3`.
//!
//! Times are integrated in `u = log t`, space on rectangles clipped to where
//! the integrand is not negligible. Every value is computed at successive
//! halvings of both mesh sizes until two levels agree to the requested
//! relative tolerance.

use std::f64::consts::PI;

use lfpp_field::{FieldError, Rect, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::maps::ConformalMapSpec;

const GL_X: [f64; 5] = [-0.906_179_845_938_664, -0.538_469_310_105_683_1, 0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
const GL_W: [f64; 5] = [0.236_926_885_056_189_1, 0.478_628_670_499_366_5, 0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1];

/// Gaussian tails beyond this many kernel widths are dropped (`e^{-18}`).
const CUTOFF: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadOptions {
    /// Agreement required between two successive mesh levels.
    pub rel_tol: f64,
    /// Differences below this are treated as converged (values near 0).
    pub abs_tol: f64,
    /// Panel width in `u = log t` at level 0.
    pub du: f64,
    /// Spatial panel width at level 0, in units of the kernel width.
    pub panel: f64,
    /// Lower time cutoff as a fraction of the lag.
    pub t_floor: f64,
    pub max_levels: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { rel_tol: 1e-3, abs_tol: 1e-15, du: 0.5, panel: 1.0, t_floor: 1.0 / 256.0, max_levels: 4 }
    }
}

/// A converged quadrature value with its last refinement step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadValue {
    pub value: f64,
    pub previous: f64,
    /// `|value - previous| / |value|`.
    pub rel_change: f64,
    /// Mesh level of `value` (0 is the coarsest).
    pub level: u32,
}

fn gl_nodes(a: f64, b: f64, width: f64) -> Vec<(f64, f64)> {
    if b <= a {
        return Vec::new();
    }
    let panels = ((b - a) / width).ceil().max(1.0) as usize;
    let w = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * 5);
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * w;
        for (x, wt) in GL_X.iter().zip(GL_W) {
            out.push((c + 0.5 * w * x, 0.5 * w * wt));
        }
    }
    out
}

/// Tensor rule over a rectangle with panels of side at most `width`.
fn rect_integral<F: Fn(Complex64) -> f64>(r: &Rect, width: f64, f: &F) -> f64 {
    let xs = gl_nodes(r.x0, r.x1, width);
    let ys = gl_nodes(r.y0, r.y1, width);
    let mut total = 0.0;
    for &(y, wy) in &ys {
        let mut row = 0.0;
        for &(x, wx) in &xs {
            row += wx * f(Complex64::new(x, y));
        }
        total += wy * row;
    }
    total
}

fn clip(a: &Rect, b: &Rect) -> Option<Rect> {
    let r = Rect::new(a.x0.max(b.x0), a.y0.max(b.y0), a.x1.min(b.x1), a.y1.min(b.y1));
    (r.x1 > r.x0 && r.y1 > r.y0).then_some(r)
}

fn square_around(z: Complex64, radius: f64) -> Rect {
    Rect::new(z.re - radius, z.im - radius, z.re + radius, z.im + radius)
}

/// Disjoint rectangles covering `U` within `radius` (sup norm) of `x` or `x'`.
fn windows(u: &Rect, x: Complex64, xp: Complex64, radius: f64) -> Vec<Rect> {
    let (a, b) = (square_around(x, radius), square_around(xp, radius));
    let overlap = (x.re - xp.re).abs() < 2.0 * radius && (x.im - xp.im).abs() < 2.0 * radius;
    let rects = if overlap {
        vec![Rect::new(a.x0.min(b.x0), a.y0.min(b.y0), a.x1.max(b.x1), a.y1.max(b.y1))]
    } else {
        vec![a, b]
    };
    rects.iter().filter_map(|r| clip(r, u)).collect()
}

/// Disjoint rectangles covering `box \ U`.
fn outside(bx: &Rect, u: &Rect) -> Vec<Rect> {
    let mut out = Vec::new();
    let push = |r: Rect, out: &mut Vec<Rect>| {
        if r.x1 > r.x0 && r.y1 > r.y0 {
            out.push(r);
        }
    };
    push(Rect::new(bx.x0, bx.y0, bx.x1.min(u.x0), bx.y1), &mut out);
    push(Rect::new(bx.x0.max(u.x1), bx.y0, bx.x1, bx.y1), &mut out);
    let (mx0, mx1) = (bx.x0.max(u.x0), bx.x1.min(u.x1));
    push(Rect::new(mx0, bx.y0, mx1, bx.y1.min(u.y0)), &mut out);
    push(Rect::new(mx0, bx.y0.max(u.y1), mx1, bx.y1), &mut out);
    out
}

/// `int_{t_lo}^{1} dt / t^3 S(t)` with `S` evaluated in parallel at the nodes.
fn time_integral<S: Fn(f64) -> f64 + Sync>(t_lo: f64, du: f64, s: &S) -> f64 {
    let nodes = gl_nodes(t_lo.ln(), 0.0, du);
    let vals: Vec<f64> = nodes.par_iter().map(|&(u, w)| w * (-2.0 * u).exp() * s(u.exp())).collect();
    vals.iter().sum()
}

/// Runs `eval(level)` at increasing levels until two successive values agree.
fn refine<E: Fn(u32) -> f64>(what: &str, opts: &QuadOptions, eval: E) -> Result<QuadValue> {
    let mut prev = eval(0);
    let mut last_change = f64::INFINITY;
    for level in 1..=opts.max_levels {
        let v = eval(level);
        let diff = (v - prev).abs();
        let rel = if v != 0.0 { diff / v.abs() } else { 0.0 };
        if diff <= opts.rel_tol * v.abs() || diff <= opts.abs_tol {
            return Ok(QuadValue { value: v, previous: prev, rel_change: rel, level });
        }
        last_change = rel;
        prev = v;
    }
    Err(FieldError::Domain(format!(
        "{what}: quadrature did not converge after {} refinements (last value {prev:e}, relative change {last_change:e}, tolerance {:e})",
        opts.max_levels, opts.rel_tol
    )))
}

fn check_points(map: &ConformalMapSpec, pts: &[Complex64]) -> Result<()> {
    for z in pts {
        if !(map.margin(*z) > 0.0) {
            return Err(FieldError::Domain(format!("point {z} is not interior to the domain of the {} map", map.id())));
        }
    }
    Ok(())
}

#[inline]
fn p(z: Complex64) -> f64 {
    (-0.5 * z.norm_sqr()).exp()
}

/// First term: `int_0^1 dt/t^3 int_U (p((x-y)/t) - p(w(x,y)/t) - p((x'-y)/t) + p(w(x',y)/t))^2 dy`
/// with `p(z) = e^{-|z|^2/2}` and `w(x,y) = (F(x)-F(y))/F'(y)`.
///
/// Times below `t_floor |x - x'|` are dropped; their contribution is
/// `O(t^2)` there.
pub fn kernel_gap_integral(map: &ConformalMapSpec, x: Complex64, xp: Complex64, opts: &QuadOptions) -> Result<QuadValue> {
    check_points(map, &[x, xp])?;
    let lag = (x - xp).norm();
    if lag == 0.0 {
        return Ok(QuadValue { value: 0.0, previous: 0.0, rel_change: 0.0, level: 0 });
    }
    let spread = CUTOFF * map.distortion();
    refine("first term", opts, |level| {
        let scale = 0.5f64.powi(level as i32);
        let s = |t: f64| {
            let g = |y: Complex64| {
                let plain = p((x - y) / t) - p((xp - y) / t);
                let mapped = p(map.w(x, y) / t) - p(map.w(xp, y) / t);
                let d = plain - mapped;
                d * d
            };
            windows(&map.domain, x, xp, spread * t)
                .iter()
                .map(|r| rect_integral(r, opts.panel * scale * t, &g))
                .sum()
        };
        time_integral(opts.t_floor * lag, opts.du * scale, &s)
    })
}

/// Second term (the `U^c` part of `dphi_2`):
/// `int_0^1 dt/t^3 int_{U^c} (p((x-y)/t) - p((x'-y)/t))^2 dy`.
pub fn boundary_term_integral(map: &ConformalMapSpec, x: Complex64, xp: Complex64, opts: &QuadOptions) -> Result<QuadValue> {
    check_points(map, &[x, xp])?;
    let lag = (x - xp).norm();
    if lag == 0.0 {
        return Ok(QuadValue { value: 0.0, previous: 0.0, rel_change: 0.0, level: 0 });
    }
    refine("second term", opts, |level| {
        let scale = 0.5f64.powi(level as i32);
        let s = |t: f64| {
            let g = |y: Complex64| {
                let d = p((x - y) / t) - p((xp - y) / t);
                d * d
            };
            let r = CUTOFF * t;
            let bx = Rect::new(x.re.min(xp.re) - r, x.im.min(xp.im) - r, x.re.max(xp.re) + r, x.im.max(xp.im) + r);
            outside(&bx, &map.domain).iter().map(|q| rect_integral(q, opts.panel * scale * t, &g)).sum()
        };
        time_integral(opts.t_floor * lag, opts.du * scale, &s)
    })
}

/// Third term: the pointwise variance of `dphi_3(x)`,
/// `pi int_U int_{delta^2 / |F'(y)|^2}^{delta^2} p_{t/2}(w(x,y))^2 dt dy`
/// in the field normalization where `phi_{0,n}(x)` has variance `n log 2`.
///
/// The time integral is closed form: with `a = 2 |w|^2`,
/// `int_{t1}^{t2} e^{-a/t} / (pi t)^2 dt = (e^{-a/t2} - e^{-a/t1}) / (pi^2 a)`.
/// For `|F'| = s` constant and `delta` small this is `log s`.
pub fn third_term_variance(map: &ConformalMapSpec, x: Complex64, delta: f64, opts: &QuadOptions) -> Result<QuadValue> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(FieldError::Domain(format!("delta must lie in (0, 1/2), got {delta}")));
    }
    check_points(map, &[x])?;
    let d2 = delta * delta;
    let h = |y: Complex64| {
        let dfy = map.kind.df(y).norm_sqr();
        let a = 2.0 * map.w(x, y).norm_sqr();
        if a < 1e-300 {
            return (dfy - 1.0) / (d2 * PI);
        }
        let (lo, hi) = (a / d2, a * dfy / d2);
        -(-lo).exp() * (-(hi - lo)).exp_m1() / (a * PI)
    };
    let region = clip(&square_around(x, CUTOFF * map.distortion() * delta), &map.domain).expect("x is interior");
    refine("third term", opts, |level| {
        let scale = 0.5f64.powi(level as i32);
        rect_integral(&region, opts.panel * scale * delta, &h)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_rule_integrates_polynomials() {
        let v: f64 = gl_nodes(0.0, 2.0, 0.7).iter().map(|(x, w)| w * x.powi(9)).sum();
        assert!((v - 2f64.powi(10) / 10.0).abs() < 1e-10);
    }

    #[test]
    fn outside_strips_partition() {
        let u = Rect::new(0.0, 0.0, 1.0, 1.0);
        let bx = Rect::new(-0.5, -0.5, 2.0, 0.5);
        let area: f64 = outside(&bx, &u).iter().map(|r| r.width() * r.height()).sum();
        assert!((area - (2.5 - 0.5)).abs() < 1e-12);
        assert!(outside(&Rect::new(0.2, 0.2, 0.8, 0.8), &u).is_empty());
    }

    #[test]
    fn gaussian_square_integral() {
        // int_R2 p(y/t)^2 dy = pi t^2.
        let t = 0.03;
        let f = |y: Complex64| p(y / t).powi(2);
        let v = rect_integral(&square_around(Complex64::new(0.0, 0.0), CUTOFF * t), t, &f);
        assert!((v / (PI * t * t) - 1.0).abs() < 1e-7);
    }
}
