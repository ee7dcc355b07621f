use lfpp_conformal::{coupled_scaling_check, scaled_crossing_check, ScalingConfig};
use lfpp_field::cov_phi;

fn cfg(r: u32, a: f64, b: f64, replicas: usize) -> ScalingConfig {
    ScalingConfig { r, a, b, m: 32, side: 1.0, lags: vec![0, 1, 2, 4, 8], replicas }
}

#[test]
fn unit_ratio_is_identical() {
    let rep = coupled_scaling_check(&cfg(1, 0.125, 0.5, 16), 3).unwrap();
    assert!(rep.identical);
    for r in &rep.rows {
        assert_eq!(r.cov_scaled, r.cov_direct);
    }
}

#[test]
fn dyadic_ratio_matches_covariance_oracle() {
    // phi_{1/4,1}(2 .) at lag u has covariance cov_phi(1/4, 1, 2u) = cov_phi(1/8, 1/2, u).
    for u in [0.0, 0.03, 0.1, 0.3] {
        let lhs = cov_phi(0.25, 1.0, 2.0 * u).unwrap();
        let rhs = cov_phi(0.125, 0.5, u).unwrap();
        assert!((lhs - rhs).abs() < 1e-10);
    }
    let rep = coupled_scaling_check(&cfg(2, 0.25, 1.0, 800), 7).unwrap();
    assert!(!rep.identical);
    assert!((rep.rows[0].oracle - 2.0 * 2f64.ln()).abs() < 1e-10);
    for r in &rep.rows {
        assert!(r.ok, "{r:?}");
    }
}

#[test]
fn unresolved_scale_rejected() {
    // a / r = 1/16 needs m >= 64.
    assert!(coupled_scaling_check(&cfg(4, 0.25, 1.0, 16), 1).is_err());
    assert!(coupled_scaling_check(&cfg(3, 0.25, 1.0, 16), 1).is_err());
}

#[test]
fn crossing_medians_scale() {
    let rep = scaled_crossing_check(1, 5.0, 0.2, 200, 11).unwrap();
    assert!(rep.overlap, "{:?} vs {:?}", rep.scaled, rep.direct);
    let z = scaled_crossing_check(2, 4.0, 0.0, 16, 1).unwrap();
    assert!((z.scaled.estimate - 1.0).abs() < 1e-12 && (z.direct.estimate - 1.0).abs() < 1e-12);
}
