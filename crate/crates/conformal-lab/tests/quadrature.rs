use lfpp_conformal::*;
use lfpp_field::quad::integrate_breaks;
use lfpp_field::Rect;
use num_complex::Complex64;
use proptest::prelude::*;

fn opts() -> QuadOptions {
    QuadOptions::default()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn p(z: Complex64) -> f64 {
    (-0.5 * z.norm_sqr()).exp()
}

fn breaks(lo: f64, hi: f64, centers: &[f64], t: f64) -> Vec<f64> {
    let mut b = vec![lo, hi];
    for &x in centers {
        for d in [-6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0] {
            let v = x + d * t;
            if v > lo && v < hi {
                b.push(v);
            }
        }
    }
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

/// Nested adaptive Gauss-Kronrod over the whole domain, from `t = 1e-3 lag`.
fn oracle_first(map: &ConformalMapSpec, x: Complex64, xp: Complex64) -> f64 {
    let u = map.domain;
    let lag = (x - xp).norm();
    let outer = |s: f64| {
        let t = s.exp();
        let row = |y2: f64| {
            let g = |y1: f64| {
                let y = c(y1, y2);
                let d = (p((x - y) / t) - p((xp - y) / t)) - (p(map.w(x, y) / t) - p(map.w(xp, y) / t));
                d * d
            };
            integrate_breaks(g, &breaks(u.x0, u.x1, &[x.re, xp.re], t), 1e-7, 1e-6 * t.powi(3)).unwrap()
        };
        let area = integrate_breaks(row, &breaks(u.y0, u.y1, &[x.im, xp.im], t), 1e-6, 1e-6 * t.powi(4)).unwrap();
        (-2.0 * s).exp() * area
    };
    integrate_breaks(outer, &breaks((1e-3 * lag).ln(), 0.0, &[lag.ln()], 1.0), 1e-5, 1e-12 * lag * lag).unwrap()
}

#[test]
fn first_term_matches_adaptive_oracle() {
    let map = ConformalMapSpec::quadratic(0.25).unwrap();
    for lag in [0.25, 1.0 / 32.0] {
        let (x, xp) = lag_pair(&map, lag);
        let v = kernel_gap_integral(&map, x, xp, &opts()).unwrap().value;
        let o = oracle_first(&map, x, xp);
        assert!((v / o - 1.0).abs() < 2e-3, "lag {lag}: {v} vs oracle {o}");
    }
}

#[test]
fn first_term_ratio_bounded_quadratic() {
    // Frozen from the oracle-checked sweep: ratios fall from 0.068 to 0.0091.
    let map = ConformalMapSpec::quadratic(0.25).unwrap();
    let s = lag_sweep(&map, Term::First, &dyadic(2, 7), &opts()).unwrap();
    assert!(s.spread < 10.0, "spread {}", s.spread);
    assert!((s.rows[0].ratio - 0.06809).abs() < 1e-4);
    assert!((s.rows[5].ratio - 0.009088).abs() < 1e-5);
    for r in &s.rows {
        assert!(r.rel_change < 10.0 * opts().rel_tol);
    }
}

#[test]
fn affine_first_term_vanishes() {
    let quad = ConformalMapSpec::quadratic(0.25).unwrap();
    for scale in [c(2.0, 0.0), c(1.0, 1.0), c(0.0, 1.0)] {
        let map = ConformalMapSpec::affine(scale, c(0.3, -0.2)).unwrap();
        for lag in [0.25, 1.0 / 64.0] {
            let (x, xp) = lag_pair(&map, lag);
            let v = kernel_gap_integral(&map, x, xp, &opts()).unwrap().value;
            let reference = kernel_gap_integral(&quad, x, xp, &opts()).unwrap().value;
            assert!(v.abs() <= 1e-12 * reference, "{v} vs {reference}");
        }
    }
}

#[test]
fn coincident_points_give_zero() {
    let map = ConformalMapSpec::square().unwrap();
    let x = map.center();
    assert_eq!(kernel_gap_integral(&map, x, x, &opts()).unwrap().value, 0.0);
    assert_eq!(boundary_term_integral(&map, x, x, &opts()).unwrap().value, 0.0);
}

#[test]
fn boundary_term_decreases_with_distance() {
    let near = ConformalMapSpec::quadratic(0.25).unwrap();
    // Same center, distance to the boundary doubled.
    let far = ConformalMapSpec::new(MapKind::Quadratic { c: 0.25 }, Rect::new(0.0, -1.0, 2.0, 1.0)).unwrap();
    for lag in [0.25, 1.0 / 16.0] {
        let (x, xp) = lag_pair(&near, lag);
        let a = boundary_term_integral(&near, x, xp, &opts()).unwrap().value;
        let b = boundary_term_integral(&far, x, xp, &opts()).unwrap().value;
        assert!(b < a && b > 0.0, "{b} !< {a}");
    }
}

#[test]
fn boundary_term_is_quadratic_in_lag() {
    // Away from U, the kernel difference is smooth, so the U^c integral is
    // c |x - x'|^2 + O(|x - x'|^4): the ratio to |x - x'| halves with the lag.
    let map = ConformalMapSpec::quadratic(0.25).unwrap();
    let s = lag_sweep(&map, Term::Second, &dyadic(4, 7), &opts()).unwrap();
    for w in s.rows.windows(2) {
        assert!((w[0].ratio / w[1].ratio - 2.0).abs() < 0.01);
    }
    assert!(s.max_ratio < 1.2);
}

#[test]
fn third_term_frullani() {
    // Constant |F'| = s: pi int int p_{t/2}^2 = log s over R^2.
    for (scale, want) in [(c(2.0, 0.0), 2f64.ln()), (c(1.0, 1.0), 0.5 * 2f64.ln()), (c(0.6, 0.8), 0.0)] {
        let map = ConformalMapSpec::affine(scale, c(0.0, 0.0)).unwrap();
        let v = third_term_variance(&map, map.center(), 1.0 / 32.0, &opts()).unwrap().value;
        assert!((v - want).abs() < 1e-6, "{scale}: {v} vs {want}");
    }
}

#[test]
fn third_term_bounded_over_delta() {
    let map = ConformalMapSpec::quadratic(0.25).unwrap();
    let s = delta_sweep(&map, &dyadic(2, 6), &opts()).unwrap();
    assert!(s.spread <= 1.5, "spread {}", s.spread);
    // Small delta sees |F'| ~ |F'(x)| = 1.5 near x.
    let last = s.rows.last().unwrap().value;
    assert!((last - 1.5f64.ln()).abs() < 0.01);
    let errs: Vec<f64> = s.rows.iter().map(|r| (r.value - 1.5f64.ln()).abs()).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]));
    assert!(third_term_variance(&map, map.center(), 0.5, &opts()).is_err());
}

#[test]
fn case_a_radius() {
    let q = ConformalMapSpec::quadratic(0.25).unwrap();
    let s = ConformalMapSpec::square().unwrap();
    let a = ConformalMapSpec::affine(c(3.0, 0.0), c(0.0, 0.0)).unwrap();
    assert_eq!(q.eps_case_a(q.center()), 0.5);
    assert_eq!(s.eps_case_a(s.center()), 0.5);
    assert!((s.eps_case_a(c(1.6, 0.0)) - 0.4).abs() < 1e-12);
    assert!((a.eps_case_a(c(0.6, 0.0)) - 0.1).abs() < 1e-12);
    // The lower bound |a(x-y) + (1-a) w| >= |x-y|/2 holds on the ball.
    let x = q.center();
    let eps = q.eps_case_a(x);
    for k in 0..64 {
        let th = k as f64 * 0.1;
        let y = x + Complex64::from_polar(eps * (k as f64 + 1.0) / 64.0, th);
        let w = q.w(x, y);
        for al in [0.0, 0.3, 0.7, 1.0] {
            assert!((al * (x - y) + (1.0 - al) * w).norm() >= 0.5 * (x - y).norm() - 1e-12);
        }
    }
}

#[test]
fn points_outside_domain_rejected() {
    let map = ConformalMapSpec::quadratic(0.25).unwrap();
    assert!(kernel_gap_integral(&map, c(0.0, 0.0), map.center(), &opts()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn affine_third_term_is_log_modulus(r in 1.0f64..4.0, th in 0.0f64..6.28) {
        let map = ConformalMapSpec::affine(Complex64::from_polar(r, th), c(0.1, 0.2)).unwrap();
        let v = third_term_variance(&map, map.center(), 1.0 / 16.0, &opts()).unwrap().value;
        prop_assert!((v - r.ln()).abs() < 1e-5);
    }

    #[test]
    fn first_term_symmetric(lag in 0.01f64..0.3) {
        let map = ConformalMapSpec::quadratic(0.25).unwrap();
        let (x, xp) = lag_pair(&map, lag);
        let a = kernel_gap_integral(&map, x, xp, &opts()).unwrap().value;
        let b = kernel_gap_integral(&map, xp, x, &opts()).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }
}
