use approx::assert_relative_eq;
use lfpp_field::{sample_phi, FieldSample, GridSpec, Rect};
use lfpp_metric::*;
use proptest::prelude::*;

fn flat(m: u32, rect: Rect, c: f64) -> FieldSample {
    FieldSample::constant(GridSpec::new(m, rect).unwrap(), c)
}

/// Bellman-Ford relaxation over every edge of the 8-neighbour grid: an
/// independent oracle for side-to-side distances.
fn bellman_ford_crossing(wg: &WeightGrid) -> f64 {
    let (nx, ny, h) = (wg.nx(), wg.ny(), wg.h());
    let mut d = vec![f64::INFINITY; nx * ny];
    for j in 0..ny {
        d[j * nx] = 0.0;
    }
    loop {
        let mut changed = false;
        for j in 0..ny {
            for i in 0..nx {
                for dj in -1i64..=1 {
                    for di in -1i64..=1 {
                        let (a, b) = (i as i64 + di, j as i64 + dj);
                        if (di, dj) == (0, 0) || a < 0 || b < 0 || a >= nx as i64 || b >= ny as i64 {
                            continue;
                        }
                        let len = if di != 0 && dj != 0 { h * 2f64.sqrt() } else { h };
                        let u = b as usize * nx + a as usize;
                        let w = len * (wg.weights[u] + wg.weights[j * nx + i]) / 2.0;
                        if d[u] + w < d[j * nx + i] - 1e-15 {
                            d[j * nx + i] = d[u] + w;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    (0..ny).map(|j| d[j * nx + nx - 1]).fold(f64::INFINITY, f64::min)
}

#[test]
fn flat_field_crossings() {
    let f = flat(16, Rect::sized(3.0, 1.0), 0.0);
    let wg = build_weights(&f, 0.5, 1.0).unwrap();
    assert!(wg.weights.iter().all(|&w| w == 1.0));
    let cr = crossing(&wg, &Rect::sized(3.0, 1.0), Orientation::LeftRight).unwrap();
    assert_relative_eq!(cr.length, 3.0, max_relative = 1e-14);
    let c = 0.7;
    let wg = build_weights(&flat(16, Rect::sized(3.0, 1.0), c), 0.5, 1.0).unwrap();
    let cr = crossing(&wg, &Rect::sized(3.0, 1.0), Orientation::LeftRight).unwrap();
    assert_relative_eq!(cr.length, 3.0 * (0.5 * c).exp(), max_relative = 1e-14);
    let wg = build_weights(&flat(16, Rect::sized(3.0, 1.0), c), 0.5, (0.5 * c).exp()).unwrap();
    assert!(wg.weights.iter().all(|&w| (w - 1.0).abs() < 1e-15));
}

#[test]
fn wall_with_gap_matches_relaxation_oracle() {
    let g = GridSpec::new(15, Rect::unit()).unwrap();
    let f = FieldSample::from_fn(g, |x, y| if (x - 0.4667).abs() < 0.03 && !(0.6..0.7).contains(&y) { 10.0 } else { 0.0 });
    let wg = build_weights(&f, 1.0, 1.0).unwrap();
    let cr = crossing(&wg, &Rect::unit(), Orientation::LeftRight).unwrap();
    let oracle = bellman_ford_crossing(&wg);
    assert_relative_eq!(cr.length, oracle, max_relative = 1e-12);
    // The geodesic passes the wall column through the gap.
    let wall_i = 7;
    assert!(cr.geodesic.iter().filter(|p| p.0 == wall_i).all(|p| wg.weight(p.0 as usize, p.1 as usize) == 1.0));
    let through_wall = wg.h() * (1.0 + 10f64.exp());
    assert!(cr.length < 1.0 + through_wall);
}

#[test]
fn random_fields_match_relaxation_oracle() {
    let g = GridSpec::for_scale(2.0, Rect::unit()).unwrap();
    for seed in 0..4 {
        let f = sample_phi(0.0, 2.0, &g, seed).unwrap();
        let wg = build_weights(&f, 0.8, 1.0).unwrap();
        let cr = crossing(&wg, &Rect::unit(), Orientation::LeftRight).unwrap();
        assert_relative_eq!(cr.length, bellman_ford_crossing(&wg), max_relative = 1e-12);
    }
}

#[test]
fn geodesic_is_valid_and_reproducible() {
    let g = GridSpec::for_scale(5.0, Rect::sized(3.0, 1.0)).unwrap();
    let f = sample_phi(0.0, 5.0, &g, 3).unwrap();
    let wg = build_weights(&f, 0.4, 1.0).unwrap();
    for o in [Orientation::LeftRight, Orientation::TopBottom] {
        let cr = crossing(&wg, &Rect::sized(3.0, 1.0), o).unwrap();
        assert_eq!(path_length(&wg, &cr.geodesic).unwrap(), cr.length);
        let (a, b) = (cr.geodesic[0], *cr.geodesic.last().unwrap());
        match o {
            Orientation::LeftRight => assert!(a.0 == 0 && b.0 as usize == wg.nx() - 1),
            Orientation::TopBottom => assert!(a.1 == 0 && b.1 as usize == wg.ny() - 1),
        }
        let again = crossing(&wg, &Rect::sized(3.0, 1.0), o).unwrap();
        assert_eq!(again.geodesic, cr.geodesic);
        let rev = crossing_with(&wg, &Rect::sized(3.0, 1.0), o, TieBreak::Reversed).unwrap();
        assert_eq!(rev.length, cr.length);
    }
}

#[test]
fn subpath_comparisons() {
    let g = GridSpec::for_scale(4.0, Rect::sized(3.0, 3.0)).unwrap();
    let f = sample_phi(0.0, 4.0, &g, 8).unwrap();
    let wg = build_weights(&f, 0.5, 1.0).unwrap();
    let long = crossing(&wg, &Rect::sized(3.0, 1.0), Orientation::LeftRight).unwrap().length;
    for a in 0..3 {
        let sq = Rect::new(a as f64, 0.0, a as f64 + 1.0, 1.0);
        assert!(long >= crossing(&wg, &sq, Orientation::LeftRight).unwrap().length);
    }
    let tall = crossing(&wg, &Rect::sized(1.0, 3.0), Orientation::LeftRight).unwrap().length;
    assert!(tall <= crossing(&wg, &Rect::unit(), Orientation::LeftRight).unwrap().length);
}

#[test]
fn refinement_of_flat_field_is_exact() {
    let a = crossing(&build_weights(&flat(32, Rect::unit(), 0.0), 1.0, 1.0).unwrap(), &Rect::unit(), Orientation::LeftRight).unwrap();
    let b = crossing(&build_weights(&flat(64, Rect::unit(), 0.0), 1.0, 1.0).unwrap(), &Rect::unit(), Orientation::LeftRight).unwrap();
    assert!((a.length - b.length).abs() < 1e-9);
}

#[test]
fn degenerate_and_outside_rects_are_errors() {
    let wg = build_weights(&flat(8, Rect::unit(), 0.0), 1.0, 1.0).unwrap();
    assert!(crossing(&wg, &Rect::new(0.0, 0.0, 0.0, 1.0), Orientation::LeftRight).is_err());
    assert!(crossing(&wg, &Rect::sized(2.0, 1.0), Orientation::LeftRight).is_err());
    assert!(build_weights(&flat(8, Rect::unit(), 0.0), 1.0, 0.0).is_err());
}

#[test]
fn overflow_is_clamped_and_counted() {
    let g = GridSpec::new(8, Rect::unit()).unwrap();
    let f = FieldSample::from_fn(g, |x, _| if x > 0.5 { 5000.0 } else { 0.0 });
    let wg = build_weights(&f, 1.0, 1.0).unwrap();
    assert_eq!(wg.clamped, 4 * 9);
    assert!(wg.weights.iter().all(|w| w.is_finite()));
}

#[test]
fn point_distances() {
    let wg = build_weights(&flat(32, Rect::unit(), 0.0), 1.0, 1.0).unwrap();
    assert_relative_eq!(point_distance(&wg, (0.0, 0.0), (1.0, 1.0)), 2f64.sqrt(), max_relative = 1e-12);
    assert_eq!(point_distance(&wg, (0.3, 0.3), (0.3, 0.3)), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn triangle_inequality(seed in 0u64..1000, p in proptest::array::uniform6(0.0f64..1.0)) {
        let g = GridSpec::for_scale(3.0, Rect::unit()).unwrap();
        let wg = build_weights(&sample_phi(0.0, 3.0, &g, seed).unwrap(), 0.6, 1.0).unwrap();
        let (x, y, z) = ((p[0], p[1]), (p[2], p[3]), (p[4], p[5]));
        let dxz = point_distance(&wg, x, z);
        let dxy = point_distance(&wg, x, y);
        let dyz = point_distance(&wg, y, z);
        prop_assert!(dxz <= dxy + dyz + 1e-12 * dxz);
    }

    #[test]
    fn larger_field_gives_longer_crossings(seed in 0u64..1000, bump in 0.0f64..2.0) {
        let g = GridSpec::for_scale(3.0, Rect::unit()).unwrap();
        let f = sample_phi(0.0, 3.0, &g, seed).unwrap();
        let mut up = f.clone();
        for (k, v) in up.values.iter_mut().enumerate() {
            *v += bump * ((k % 7) as f64 / 7.0);
        }
        let a = crossing(&build_weights(&f, 0.5, 1.0).unwrap(), &Rect::unit(), Orientation::LeftRight).unwrap().length;
        let b = crossing(&build_weights(&up, 0.5, 1.0).unwrap(), &Rect::unit(), Orientation::LeftRight).unwrap().length;
        prop_assert!(b >= a);
    }
}
