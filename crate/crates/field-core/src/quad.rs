//! Adaptive Gauss-Kronrod quadrature (7/15 point pair) on finite intervals.

use crate::{FieldError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Integral estimate and error estimate of one G7K15 panel.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = hw * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * hw, ((kron - gauss) * hw).abs())
}

/// Integrates `f` over `[a, b]` to the requested relative tolerance.
///
/// Panels are bisected in order of largest error estimate until the summed
/// error falls below `max(rel_tol * |I|, abs_tol)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (i0, e0) = gk15(&f, a, b);
    let mut panels = vec![(a, b, i0, e0)];
    let mut total = i0;
    let mut err = e0;
    let mut iter = 0;
    while err > (rel_tol * total.abs()).max(abs_tol) {
        iter += 1;
        if iter > 4000 {
            return Err(FieldError::Domain(format!(
                "quadrature did not converge on [{a}, {b}]: estimate {total}, error {err}"
            )));
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (pa, pb, pi, pe) = panels.swap_remove(idx);
        let m = 0.5 * (pa + pb);
        let (i1, e1) = gk15(&f, pa, m);
        let (i2, e2) = gk15(&f, m, pb);
        total += i1 + i2 - pi;
        err += e1 + e2 - pe;
        panels.push((pa, m, i1, e1));
        panels.push((m, pb, i2, e2));
    }
    // Re-sum to shed accumulated cancellation in the running total.
    Ok(panels.iter().map(|p| p.2).sum())
}

/// Composite Gauss-Kronrod over consecutive breakpoints.
pub fn integrate_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], rel_tol: f64, abs_tol: f64) -> Result<f64> {
    let mut s = 0.0;
    for w in breaks.windows(2) {
        s += integrate(&f, w[0], w[1], rel_tol, abs_tol)?;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, 1e-13, 0.0).unwrap();
        assert!((v - (64.0 / 6.0 - 4.0)).abs() < 1e-12);
    }

    #[test]
    fn gaussian_tail() {
        let v = integrate(|x| (-x * x / 2.0).exp(), -10.0, 10.0, 1e-12, 0.0).unwrap();
        assert!((v - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn log_singularity() {
        let v = integrate(|x: f64| x.ln(), 1e-12, 1.0, 1e-10, 0.0).unwrap();
        assert!((v + 1.0).abs() < 1e-8);
    }
}
