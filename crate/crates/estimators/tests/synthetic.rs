use lfpp_estimators::condition_t::condition_t_fit;
use lfpp_estimators::exponent::{exponent_fit, exponent_target, lambda_apriori, weak_mult_check};
use lfpp_estimators::mc::{FieldModel, SampleSet};
use lfpp_estimators::quantile::{quantile, quantile_table};
use lfpp_estimators::shift::quantile_shift_check;
use lfpp_estimators::tails::{tail_curve, tail_curve_on, TailSide};
use lfpp_estimators::variance::{quantile_variance_link, var_log_crossing};
use lfpp_estimators::{rsw_compare, FieldError};
use lfpp_field::seed::rng;
use lfpp_field::Rect;
use lfpp_metric::Orientation;
use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};
use std::f64::consts::{LN_2, LOG2_E};

fn set(scale: f64, values: Vec<f64>) -> SampleSet {
    SampleSet {
        scale,
        xi: 0.2,
        observable: "L_{1,1}".into(),
        rect: Rect::unit(),
        orientation: Orientation::LeftRight,
        model: FieldModel::Phi,
        seeds: (0..values.len() as u64).collect(),
        values,
        config_digest: String::new(),
    }
}

fn lognormal(n: usize, sd: f64, scale: f64, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut r);
            scale * (sd * z).exp()
        })
        .collect()
}

#[test]
fn quantile_rule() {
    let x: Vec<f64> = (1..=10).map(|i| i as f64).collect();
    assert_eq!(quantile(&x, 0.3).unwrap(), 3.0);
    let odd = [5.0, 1.0, 4.0, 2.0, 3.0];
    assert_eq!(quantile(&odd, 0.5).unwrap(), 3.0);
    let c = vec![2.5; 40];
    for p in [0.05, 0.1, 0.5, 0.9] {
        assert_eq!(quantile(&c, p).unwrap(), 2.5);
    }
    assert!(matches!(quantile(&x, 0.05), Err(FieldError::Domain(_))));
    assert!(quantile(&x, 0.0).is_err());
}

#[test]
fn table_orders_and_running_ratio() {
    let sets = [set(1.0, lognormal(400, 0.3, 1.0, 1)), set(2.0, lognormal(400, 0.1, 0.8, 2)), set(3.0, lognormal(400, 0.5, 0.7, 3))];
    let refs: Vec<&SampleSet> = sets.iter().collect();
    let qt = quantile_table(&refs, 0.1, 50, 9).unwrap();
    let mut prev = 1.0;
    for r in &qt.rows {
        assert!(r.ell <= r.lambda && r.lambda <= r.bar_ell);
        assert!(r.big_lambda >= prev && r.big_lambda >= 1.0);
        assert!(r.ell_hw >= 0.0 && r.lambda_hw > 0.0);
        prev = r.big_lambda;
    }
    // The narrow middle scale does not lower the running maximum.
    assert_eq!(qt.rows[1].big_lambda, qt.rows[0].big_lambda);
    assert!(quantile_table(&refs, 0.5, 0, 0).is_err());
}

/// Regression of exact `log Phi(-s)` on the same grid and weights.
fn gaussian_tail_oracle(points: &[(f64, usize)]) -> f64 {
    let nd = Normal::new(0.0, 1.0).unwrap();
    let (mut sw, mut sx, mut sy) = (0.0, 0.0, 0.0);
    for &(s, h) in points {
        let w = h as f64;
        sw += w;
        sx += w * s * s;
        sy += w * nd.cdf(-s).ln();
    }
    let (mx, my) = (sx / sw, sy / sw);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(s, h) in points {
        let w = h as f64;
        sxx += w * (s * s - mx).powi(2);
        sxy += w * (s * s - mx) * (nd.cdf(-s).ln() - my);
    }
    sxy / sxx
}

#[test]
fn gaussian_lower_tail_slope() {
    let lam = 0.8;
    let x = lognormal(20000, 1.0, lam, 11);
    let grid: Vec<f64> = (1..=20).map(|i| i as f64 * 0.15).collect();
    let c = tail_curve_on(&x, lam, TailSide::Lower, &grid).unwrap();
    let fit = c.fit.unwrap();
    let pts: Vec<(f64, usize)> = c.points.iter().filter(|p| p.fitted).map(|p| (p.s, p.hits)).collect();
    let oracle = gaussian_tail_oracle(&pts);
    // Exact log Phi(-s) over s <= 3 has regression slope close to -1/2 in s^2.
    assert!((-0.75..=-0.45).contains(&oracle), "oracle slope {oracle}");
    assert!((fit.slope - oracle).abs() < 3.0 * fit.slope_se.max(0.01), "{} vs {}", fit.slope, oracle);
    assert!(fit.r2 > 0.95);
}

#[test]
fn degenerate_tail_is_empty() {
    let x = vec![1.5; 300];
    let c = tail_curve(&x, 1.5, TailSide::Lower).unwrap();
    assert!(c.points.is_empty());
    assert_eq!(c.omitted.len(), 24);
    assert!(c.fit.is_none());
    assert!(tail_curve(&x[..100], 1.5, TailSide::Lower).is_err());
}

#[test]
fn upper_fit_uses_s_above_two() {
    let x = lognormal(40000, 1.0, 1.0, 12);
    let grid: Vec<f64> = (1..=28).map(|i| i as f64 * 0.125).collect();
    let c = tail_curve_on(&x, 1.0, TailSide::Upper, &grid).unwrap();
    assert!(c.points.iter().filter(|p| p.s <= 2.0).all(|p| !p.fitted));
    assert!(c.points.iter().filter(|p| p.fitted).count() >= 3);
    let f = c.fit.unwrap();
    assert!(f.slope < 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn doubling_reference_shifts_by_log2(seed in 0u64..1000, lam in 0.2f64..5.0) {
        let x = lognormal(300, 0.7, 1.0, seed);
        let grid: Vec<f64> = (1..=10).map(|i| LN_2 + 0.1 * i as f64).collect();
        let shifted: Vec<f64> = grid.iter().map(|s| s - LN_2).collect();
        for side in [TailSide::Lower, TailSide::Upper] {
            let (lo_lam, hi_lam) = match side {
                TailSide::Lower => (2.0 * lam, lam),
                TailSide::Upper => (lam, 2.0 * lam),
            };
            let a = tail_curve_on(&x, lo_lam, side, &grid).unwrap();
            let b = tail_curve_on(&x, hi_lam, side, &shifted).unwrap();
            let ha: Vec<usize> = a.points.iter().map(|p| p.hits).collect();
            let hb: Vec<usize> = b.points.iter().map(|p| p.hits).collect();
            prop_assert_eq!(ha, hb);
        }
    }

    #[test]
    fn quantiles_are_monotone(seed in 0u64..1000, p in 0.05f64..0.45, dp in 0.0f64..0.05) {
        let x = lognormal(200, 0.5, 1.0, seed);
        prop_assert!(quantile(&x, p).unwrap() <= quantile(&x, p + dp).unwrap());
        prop_assert!(quantile(&x, 1.0 - p).unwrap() >= quantile(&x, 1.0 - p - dp).unwrap());
    }

    #[test]
    fn geometric_medians_multiply(rho in 0.3f64..0.99) {
        let ns: Vec<f64> = (1..=8).map(|n| n as f64).collect();
        let l: Vec<f64> = ns.iter().map(|n| rho.powf(*n)).collect();
        let r = weak_mult_check(&ns, &l).unwrap();
        prop_assert!(r.max_deviation < 1e-12);
    }
}

#[test]
fn shift_without_variance_is_identity() {
    let x = lognormal(400, 0.3, 1.0, 13);
    let r = quantile_shift_check(&x, 0.2, 0.0, &[0.05, 0.1, 0.2], 0, 1).unwrap();
    for row in &r.rows {
        assert_eq!(row.factor, 1.0);
        assert_eq!(row.lhs_low, quantile(&x, row.eps).unwrap());
        assert!(row.holds_low && row.holds_high);
    }
}

#[test]
fn shift_of_constant_field_matches_normal_quantiles() {
    let (xi, sigma2, width) = (0.5f64, 2.0f64, 1.0f64);
    let sd = xi * sigma2.sqrt();
    let base = vec![width; 40000];
    let eps = [0.05, 0.1, 0.2];
    let r = quantile_shift_check(&base, xi, sigma2, &eps, 0, 7).unwrap();
    let nd = Normal::new(0.0, 1.0).unwrap();
    for row in &r.rows {
        let e = row.eps;
        let s = (2.0 * sd * sd * (1.0 / e).ln()).sqrt();
        assert!((row.factor - s.exp()).abs() < 1e-12);
        // Closed forms: ell = w e^{sd z_eps}, bar-ell(2 eps) = w e^{sd z_{1-2eps}}.
        let lo = width * (sd * nd.inverse_cdf(e)).exp();
        let hi = width * (sd * nd.inverse_cdf(1.0 - 2.0 * e)).exp();
        assert!((row.lhs_low / lo - 1.0).abs() < 0.03, "{} vs {lo}", row.lhs_low);
        assert!((row.lhs_high / hi - 1.0).abs() < 0.03, "{} vs {hi}", row.lhs_high);
        assert!((row.rhs_low / (width * s.exp()) - 1.0).abs() < 1e-12);
        assert!(lo <= width * s.exp() && hi <= width * s.exp());
        assert!(row.holds_low && row.holds_high);
    }
}

#[test]
fn variance_checks() {
    let c = vec![1.3; 150];
    let v = var_log_crossing(&c, 0.2, 4.0).unwrap();
    assert_eq!(v.variance, 0.0);
    assert!(v.ok && (v.bound - 0.04 * 5.0 * LN_2).abs() < 1e-15);
    assert!(var_log_crossing(&c[..50], 0.2, 4.0).is_err());
    let x = lognormal(2000, 0.4, 1.0, 21);
    let q = quantile_variance_link(&x, 0.1, 100, 3).unwrap();
    assert!(q.ok && q.spread_sq < q.bound);
    // For a normal Z the spread is (2 z_{0.9})^2 sd^2 = 6.57 sd^2.
    assert!((q.spread_sq / (0.16 * 6.5697) - 1.0).abs() < 0.1);
}

#[test]
fn rsw_degenerate_and_self_comparison() {
    let easy: Vec<SampleSet> = (3..=5).map(|n| set(n as f64, vec![1.0; 40])).collect();
    let hard: Vec<SampleSet> = (3..=5).map(|n| set(n as f64, vec![3.0; 40])).collect();
    let e: Vec<&SampleSet> = easy.iter().collect();
    let h: Vec<&SampleSet> = hard.iter().collect();
    let r = rsw_compare(&e, &h, 0.1).unwrap();
    assert!(r.rows.iter().all(|row| row.r == 3.0 && row.rbar == 3.0));
    assert_eq!(r.spread, 1.0);
    let same: Vec<SampleSet> = (3..=5).map(|n| set(n as f64, lognormal(400, 0.3, 1.0, n))).collect();
    let s: Vec<&SampleSet> = same.iter().collect();
    let r = rsw_compare(&s, &s, 0.1).unwrap();
    assert!(r.rows.iter().all(|row| row.r <= 1.0 && row.rbar >= 1.0));
    assert!(rsw_compare(&s, &h[..2], 0.1).is_err());
}

#[test]
fn exponent_of_geometric_medians() {
    let ns: Vec<f64> = (1..=8).map(|n| n as f64).collect();
    let l: Vec<f64> = ns.iter().map(|n| 2f64.powf(-n / 6.0)).collect();
    let f = exponent_fit(&ns, &l, Some(((8f64 / 3.0).sqrt(), 4.0))).unwrap();
    assert!((f.slope - 1.0 / 6.0).abs() < 1e-12);
    assert!(f.residuals.iter().all(|r| r.1.abs() < 1e-12));
    assert!((f.target.unwrap() - 1.0 / 6.0).abs() < 1e-15);
    assert!(f.discrepancy.unwrap().abs() < 1e-12);
    assert!(exponent_fit(&ns[..3], &l[..3], None).is_err());
}

/// Direct OLS of `y = n/6 - sqrt(n) log2 e` over `n = 1..=big_n`.
fn sqrt_oracle(big_n: usize) -> (f64, f64) {
    let ns: Vec<f64> = (1..=big_n).map(|n| n as f64).collect();
    let y: Vec<f64> = ns.iter().map(|n| n / 6.0 - n.sqrt() * LOG2_E).collect();
    let nf = big_n as f64;
    let (mx, my) = (ns.iter().sum::<f64>() / nf, y.iter().sum::<f64>() / nf);
    let sxy: f64 = ns.iter().zip(&y).map(|(x, v)| (x - mx) * (v - my)).sum();
    let sxx: f64 = ns.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let band = ns.iter().zip(&y).map(|(x, v)| (v - slope * x).abs() / x.sqrt()).fold(0.0, f64::max);
    (slope, band)
}

#[test]
fn exponent_band_of_sqrt_correction() {
    for big_n in [64usize, 1024, 4096] {
        let ns: Vec<f64> = (1..=big_n).map(|n| n as f64).collect();
        let l: Vec<f64> = ns.iter().map(|n| 2f64.powf(-n / 6.0) * n.sqrt().exp()).collect();
        let f = exponent_fit(&ns, &l, None).unwrap();
        let (slope, band) = sqrt_oracle(big_n);
        assert!((f.slope - slope).abs() < 1e-9 && (f.band - band).abs() < 1e-9);
    }
    // The slope approaches 1/6 at rate 1/sqrt(N): the OLS slope of sqrt(n) on
    // n times sqrt(N) tends to 12 (E u^{3/2} - E u^{1/2} E u) = 0.8.
    let (slope, band) = sqrt_oracle(4096);
    let gap = (1.0 / 6.0 - slope) * 64.0 / LOG2_E;
    assert!((gap - 0.8).abs() < 0.05, "scaled gap {gap}");
    assert!((band / LOG2_E - 1.0).abs() < 0.03, "band {band}");
    let target = exponent_target((8f64 / 3.0).sqrt(), 4.0);
    assert!((target - 1.0 / 6.0).abs() < 1e-15);
}

#[test]
fn weak_mult_of_sqrt_correction() {
    let a = 0.7;
    let ns: Vec<f64> = (1..=8).map(|n| n as f64).chain([2.25, 2.5, 2.75]).collect();
    let l: Vec<f64> = ns.iter().map(|n| 0.8f64.powf(*n) * (a * n.sqrt()).exp()).collect();
    let r = weak_mult_check(&ns, &l).unwrap();
    assert!(r.max_deviation <= 3.0 * a);
    assert!(r.max_deviation > 0.0);
    for &(n, k, d) in &r.deviations {
        let direct = a * ((n + k).sqrt() - n.sqrt() - k.sqrt()).abs() / k.sqrt();
        assert!((d - direct).abs() < 1e-12);
    }
    assert_eq!(r.fractional.len(), 3);
    assert!(r.fractional.iter().all(|f| f.0 == 2.0));
}

#[test]
fn condition_t_equal_weights() {
    let ks = [2u32, 3, 4, 5, 6];
    let ratios: Vec<Vec<f64>> = ks.iter().map(|&k| vec![2f64.powi(-(k as i32)); 20]).collect();
    let (norms, c) = condition_t_fit(&ks, &ratios, 1.25, 50, 1).unwrap();
    for (k, v) in ks.iter().zip(&norms) {
        assert!((v - 2f64.powi(-(*k as i32))).abs() < 1e-15);
    }
    assert!((c.estimate - LN_2).abs() < 1e-12);
    assert!(matches!(condition_t_fit(&ks, &ratios, 1.0, 0, 1), Err(FieldError::Domain(_))));
}

#[test]
fn apriori_on_flat_ratios() {
    let sets: Vec<SampleSet> = (1..=8).map(|n| set(n as f64, lognormal(400, 0.3, 1.0, 100 + n))).collect();
    let refs: Vec<&SampleSet> = sets.iter().collect();
    let qt = quantile_table(&refs, 0.1, 50, 5).unwrap();
    let a = lambda_apriori(&qt).unwrap();
    assert!(a.bounded && a.sub_sqrt);
    assert!(a.c_hat > 0.0);
}
