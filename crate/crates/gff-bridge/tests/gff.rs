use std::f64::consts::PI;

use lfpp_field::quad::integrate_breaks;
use lfpp_field::{derive_seed, FieldError, FieldKind, GridSpec, Rect};
use lfpp_gff::*;
use proptest::prelude::*;

fn gauss(var: f64, z: f64) -> f64 {
    (-z * z / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

/// Interval kernel killed outside (0, 1) by the method of images.
fn images_1d(var: f64, a: f64, b: f64) -> f64 {
    (-20..=20).map(|n| gauss(var, a - b + 2.0 * n as f64) - gauss(var, a + b + 2.0 * n as f64)).sum()
}

/// `int_0^1 K(x, z) sin(j pi z) dz` with `K` the image kernel of variance `var`.
fn image_projection(var: f64, x: f64, j: usize) -> f64 {
    let mut br = vec![0.0, 1.0];
    let sd = var.sqrt();
    for k in [-6.0, -2.0, 0.0, 2.0, 6.0] {
        let b = x + k * sd;
        if b > 0.0 && b < 1.0 {
            br.push(b);
        }
    }
    br.sort_by(f64::total_cmp);
    integrate_breaks(|z| images_1d(var, x, z) * (j as f64 * PI * z).sin(), &br, 1e-12, 1e-16).unwrap()
}

/// Covariance of the mollified field from the image-kernel projections:
/// `sum 2 pi / lambda (2 I_j(x1) I_k(x2)) (2 I_j(y1) I_k(y2))`.
fn mollified_cov_oracle(modes: usize, t: f64, x: (f64, f64), y: (f64, f64)) -> f64 {
    let var = t / 2.0;
    let p = |v: f64| (1..=modes).map(|j| image_projection(var, v, j)).collect::<Vec<_>>();
    let (a1, a2, b1, b2) = (p(x.0), p(x.1), p(y.0), p(y.1));
    let mut acc = 0.0;
    for j in 1..=modes {
        for k in 1..=modes {
            let l = PI * PI * ((j * j + k * k) as f64);
            acc += 2.0 * PI / l * (2.0 * a1[j - 1] * a2[k - 1]) * (2.0 * b1[j - 1] * b2[k - 1]);
        }
    }
    acc
}

/// Raw variance at the center: only odd modes survive, each with `e_jk = +-2`.
fn center_variance_oracle(modes: usize) -> f64 {
    let mut acc = 0.0;
    for j in (1..=modes).step_by(2) {
        for k in (1..=modes).step_by(2) {
            acc += 8.0 / (PI * ((j * j + k * k) as f64));
        }
    }
    acc
}

fn unit(m: u32) -> GridSpec {
    GridSpec::new(m, Rect::unit()).unwrap()
}

#[test]
fn dirichlet_boundary_is_exactly_zero() {
    let g = unit(16);
    for seed in 0..4 {
        let h = sample_gff(64, &g, seed).unwrap();
        for i in 0..g.nx() {
            for &j in &[0, g.ny() - 1] {
                assert_eq!(h.at(i, j), 0.0);
                assert_eq!(h.at(j, i), 0.0);
            }
        }
        assert!(h.values.iter().any(|v| *v != 0.0));
        assert_eq!(h.normalization, 2.0 * PI);
    }
}

#[test]
fn center_variance_matches_odd_mode_sum() {
    for modes in [8, 32, 64] {
        let s = series_covariance(modes, 0.0, (0.5, 0.5), (0.5, 0.5));
        let o = center_variance_oracle(modes);
        assert!((s - o).abs() < 1e-10 * o, "{modes}: {s} vs {o}");
    }
    // Frozen from the odd-mode sum.
    assert!((center_variance_oracle(64) - 4.680_388).abs() < 1e-6, "{}", center_variance_oracle(64));
}

#[test]
fn series_covariance_reflection_symmetric() {
    let (x, y) = ((0.2, 0.35), (0.6, 0.7));
    let c = series_covariance(24, 0.0, x, y);
    let rx = |p: (f64, f64)| (1.0 - p.0, p.1);
    let ry = |p: (f64, f64)| (p.0, 1.0 - p.1);
    let sw = |p: (f64, f64)| (p.1, p.0);
    for (a, b) in [(rx(x), rx(y)), (ry(x), ry(y)), (sw(x), sw(y))] {
        assert!((series_covariance(24, 0.0, a, b) - c).abs() < 1e-12);
    }
}

#[test]
fn raw_covariance_matches_truncated_series() {
    let g = unit(8);
    let modes = 32;
    let reps = 1500;
    let probes = [((4, 4), (4, 4)), ((2, 4), (6, 4)), ((3, 3), (4, 5))];
    let samples: Vec<_> = (0..reps).map(|r| sample_gff(modes, &g, derive_seed(11, &[r])).unwrap()).collect();
    for ((i0, j0), (i1, j1)) in probes {
        let prods: Vec<f64> = samples.iter().map(|h| h.at(i0, j0) * h.at(i1, j1)).collect();
        let m = prods.iter().sum::<f64>() / reps as f64;
        let se = (prods.iter().map(|p| (p - m).powi(2)).sum::<f64>() / (reps as f64 * (reps as f64 - 1.0))).sqrt();
        let o = series_covariance(modes, 0.0, g.position(i0, j0), g.position(i1, j1));
        assert!((m - o).abs() <= 3.0 * se, "{m} +- {se} vs {o}");
    }
}

#[test]
fn mollify_guard_and_kind() {
    let g = unit(16);
    let h = sample_gff(64, &g, 3).unwrap();
    assert!(matches!(mollify(&h, 0.015), Err(FieldError::Domain(_))));
    let f = mollify(&h, 1.0 / 64.0).unwrap();
    assert_eq!(f.kind, FieldKind::GffMollified);
    assert_eq!(f.scale_hi, 3.0);
}

#[test]
fn mollify_large_time_flattens() {
    let g = unit(16);
    for seed in 0..20 {
        let f = mollify(&sample_gff(64, &g, seed).unwrap(), 10.0).unwrap();
        let sup = f.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(sup < 0.1, "{sup}");
    }
}

#[test]
fn mollify_is_linear() {
    let g = unit(16);
    let (a, b) = (sample_gff(64, &g, 1).unwrap(), sample_gff(64, &g, 2).unwrap());
    let sum: Vec<f64> = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect();
    let s = GffSample::from_coefficients(64, g, sum, 0).unwrap();
    let t = 0.02;
    let (fa, fb, fs) = (mollify(&a, t).unwrap(), mollify(&b, t).unwrap(), mollify(&s, t).unwrap());
    for i in 0..fs.values.len() {
        assert!((fs.values[i] - fa.values[i] - fb.values[i]).abs() < 1e-12);
    }
}

#[test]
fn mollified_series_matches_image_quadrature() {
    let t = 1.0 / 64.0;
    for (x, y) in [((0.5, 0.5), (0.5, 0.5)), ((0.3, 0.6), (0.55, 0.45)), ((0.1, 0.9), (0.2, 0.8))] {
        let s = series_covariance(40, t, x, y);
        let o = mollified_cov_oracle(40, t, x, y);
        assert!((s - o).abs() < 1e-8 * o.abs().max(1.0), "{s} vs {o}");
    }
}

#[test]
fn mollified_covariance_monte_carlo() {
    let g = unit(16);
    let t = 1.0 / 64.0;
    let reps = 1200;
    let fields: Vec<_> = (0..reps).map(|r| mollify(&sample_gff(64, &g, derive_seed(5, &[r])).unwrap(), t).unwrap()).collect();
    let probes = [((8, 8), (8, 8)), ((4, 8), (12, 8)), ((6, 6), (7, 9)), ((2, 2), (2, 2)), ((4, 12), (8, 8))];
    for ((i0, j0), (i1, j1)) in probes {
        let prods: Vec<f64> = fields.iter().map(|f| f.at(i0, j0) * f.at(i1, j1)).collect();
        let m = prods.iter().sum::<f64>() / reps as f64;
        let se = (prods.iter().map(|p| (p - m).powi(2)).sum::<f64>() / (reps as f64 * (reps as f64 - 1.0))).sqrt();
        let o = mollified_cov_oracle(64, t, g.position(i0, j0), g.position(i1, j1));
        assert!((m - o).abs() <= 3.0 * se, "{:?}: {m} +- {se} vs {o}", ((i0, j0), (i1, j1)));
    }
}

#[test]
fn killed_series_matches_images() {
    for r in [5e-4, 0.01, 0.1, 1.0] {
        for (a, b) in [(0.3, 0.35), (0.5, 0.5), (0.05, 0.9)] {
            let s = killed_kernel_1d(r, a, b);
            let o = images_1d(r, a, b);
            assert!((s - o).abs() < 1e-10 * o.abs().max(1.0), "{r} {a} {b}: {s} vs {o}");
        }
    }
}

#[test]
fn chapman_kolmogorov() {
    let (r, x, y) = (0.02, (0.3, 0.6), (0.45, 0.5));
    let half = |z: f64, a: f64, b: f64| killed_kernel_1d(r / 2.0, a, z) * killed_kernel_1d(r / 2.0, z, b);
    let br = [0.0, 0.2, 0.3, 0.45, 0.5, 0.6, 0.8, 1.0];
    let c0 = integrate_breaks(|z| half(z, x.0, y.0), &br, 1e-12, 1e-15).unwrap();
    let c1 = integrate_breaks(|z| half(z, x.1, y.1), &br, 1e-12, 1e-15).unwrap();
    let direct = killed_kernel(r, x, y);
    assert!((c0 * c1 - direct).abs() < 1e-9 * direct, "{} vs {direct}", c0 * c1);
}

#[test]
fn gap_shrinks_with_s() {
    let (t, x, y) = (0.05, (0.25, 0.5), (0.3, 0.45));
    let big = killed_kernel_gap(t, 0.02, x, y).unwrap();
    let small = killed_kernel_gap(t, 0.002, x, y).unwrap();
    assert!(small < big, "{small} vs {big}");
    assert!(big > 0.0);
}

#[test]
fn gap_decays_like_exp_minus_c_over_s() {
    let fit = gap_decay_fit(0.05, &[0.02, 0.01, 0.005], (0.25, 0.5), (0.3, 0.45)).unwrap();
    assert!(fit.decreasing);
    assert!(fit.c > 0.0, "{}", fit.c);
    assert!(fit.r2 > 0.95, "{}", fit.r2);
}

#[test]
fn gap_refusals() {
    assert!(matches!(killed_kernel_gap(0.05, 5e-4, (0.5, 0.5), (0.5, 0.5)), Err(FieldError::Domain(_))));
    assert!(matches!(killed_kernel_gap(0.05, 0.01, (0.2, 0.5), (0.5, 0.5)), Err(FieldError::Domain(_))));
    assert!(matches!(killed_kernel_gap(0.0, 0.01, (0.5, 0.5), (0.5, 0.5)), Err(FieldError::Domain(_))));
}

#[test]
fn crossing_comparison_degenerate_xi() {
    let r = compare_crossing_laws(&[1.0 / 16.0], 0.0, 16, 9).unwrap();
    assert_eq!(r.max_ratio, 1.0);
    assert_eq!(r.rows.len(), 6);
    assert!(r.rows.iter().all(|row| row.normalized == 1.0));
}

#[test]
fn crossing_comparison_reproducible() {
    let a = compare_crossing_laws(&[1.0 / 16.0], 0.2, 32, 4).unwrap();
    let b = compare_crossing_laws(&[1.0 / 16.0], 0.2, 32, 4).unwrap();
    assert_eq!(a, b);
    assert!(compare_crossing_laws(&[1.5], 0.2, 32, 4).is_err());
    assert!(compare_crossing_laws(&[0.1], 0.2, 8, 4).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    // The killed kernel is symmetric; the smoothed one is only symmetric up to
    // the boundary correction, so the gap is compared through the triangle bound.
    #[test]
    fn gap_symmetric(a in 0.25f64..0.75, b in 0.25f64..0.75, c in 0.25f64..0.75, d in 0.25f64..0.75, s in 0.002f64..0.05) {
        let k1 = killed_kernel(s / 2.0, (a, b), (c, d));
        let k2 = killed_kernel(s / 2.0, (c, d), (a, b));
        prop_assert!((k1 - k2).abs() <= 1e-12 * k1.abs().max(1.0));
        let g1 = killed_kernel_gap(0.05, s, (a, b), (c, d)).unwrap();
        let g2 = killed_kernel_gap(0.05, s, (c, d), (a, b)).unwrap();
        let asym = (smoothed_killed(0.05, s, (a, b), (c, d)).unwrap() - smoothed_killed(0.05, s, (c, d), (a, b)).unwrap()).abs();
        prop_assert!(g1 >= 0.0 && g2 >= 0.0);
        prop_assert!(asym <= g1 + g2 + 1e-13);
    }

    #[test]
    fn series_covariance_symmetric(a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0, d in 0.0f64..1.0) {
        let u = series_covariance(16, 0.01, (a, b), (c, d));
        let v = series_covariance(16, 0.01, (c, d), (a, b));
        prop_assert!((u - v).abs() <= 1e-12 * u.abs().max(1.0));
    }
}
