use lfpp_field::*;

fn ledger_sample(seed: u64) -> FieldSample {
    let g = GridSpec::for_scale(5.0, Rect::unit()).unwrap();
    sample_psi(5.0, &g, TruncationParams::new(0.3, 0.2).unwrap(), seed, Some(2)).unwrap()
}

#[test]
fn components_sum_to_the_field_exactly() {
    let f = ledger_sample(1);
    let l = f.ledger().unwrap();
    assert_eq!(l.k(), 2);
    let mut acc = l.coarse_values().to_vec();
    for b in l.blocks() {
        for (a, v) in acc.iter_mut().zip(l.block_values(b).unwrap()) {
            *a += v;
        }
    }
    assert_eq!(acc, f.values);
}

#[test]
fn resample_and_restore_round_trip() {
    let f = ledger_sample(2);
    let l = f.ledger().unwrap();
    for c in [Component::Coarse, Component::Block(1, 2), Component::Block(-1, 0)] {
        let slab = l.slab(c).unwrap();
        let g = resample_component(&f, c, 77).unwrap();
        assert_ne!(g.values, f.values, "{c:?}");
        let back = replace_component(&g, c, slab).unwrap();
        assert_eq!(back.values, f.values, "{c:?}");
    }
}

#[test]
fn resampling_is_local_to_the_block() {
    let tp = TruncationParams::new(0.3, 0.2).unwrap();
    let f = ledger_sample(3);
    let l = f.ledger().unwrap();
    let b = (1i64, 1i64);
    let g = resample_component(&f, Component::Block(b.0, b.1), 5).unwrap();
    // Other components are untouched.
    let lg = g.ledger().unwrap();
    assert_eq!(lg.coarse_values(), l.coarse_values());
    assert_eq!(lg.block_values((2, 2)), l.block_values((2, 2)));
    // Changes are confined to the block plus the widest fine kernel support.
    let reach = tp.support(2f64.powi(-4)) + f.grid.h();
    let side = 0.25;
    let (x0, y0) = (b.0 as f64 * side, b.1 as f64 * side);
    let mut changed = 0;
    for j in 0..f.ny() {
        for i in 0..f.nx() {
            // FFT round-off leaves ~1e-17 residue inside the stored window.
            if (f.at(i, j) - g.at(i, j)).abs() > 1e-12 {
                changed += 1;
                let (x, y) = f.grid.position(i, j);
                let dx = (x0 - x).max(x - (x0 + side)).max(0.0);
                let dy = (y0 - y).max(y - (y0 + side)).max(0.0);
                assert!(dx.hypot(dy) <= reach + 1e-12, "change at ({x}, {y}) beyond {reach}");
            }
        }
    }
    assert!(changed > 0);
}

#[test]
fn far_nodes_do_not_move_under_block_resamples() {
    let f = ledger_sample(4);
    let (i, j) = f.grid.nearest(0.9, 0.9);
    let vals: Vec<f64> = (0..20).map(|s| resample_component(&f, Component::Block(0, 0), s).unwrap().at(i, j)).collect();
    assert!(vals.iter().all(|&v| v == f.at(i, j)));
}

#[test]
fn ledger_law_matches_plain_psi() {
    // The block layout only reorganizes the noise.
    let tp = TruncationParams::new(0.3, 0.2).unwrap();
    let g = GridSpec::for_scale(4.0, Rect::unit()).unwrap();
    let ls = LedgerSampler::new(4.0, 2, g, tp, SamplerOptions::default()).unwrap();
    let plain = Sampler::new(vec![KernelFamily::Truncated(tp)], 0.0, 4.0, g, SamplerOptions { mode: SliceMode::Independent, ..Default::default() }).unwrap();
    let (ci, cj) = (g.nx() / 2 + 3, g.ny() / 2 + 5);
    let var = |xs: Vec<f64>| {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let sq: Vec<f64> = xs.iter().map(|x| (x - m).powi(2)).collect();
        let v = sq.iter().sum::<f64>() / n;
        let se = (sq.iter().map(|s| (s - v).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        (v, se)
    };
    let (va, sa) = var((0..1500).map(|r| ls.sample(derive_seed(8, &[r])).at(ci, cj)).collect());
    let (vb, sb) = var((0..1500).map(|r| plain.sample(derive_seed(9, &[r])).at(ci, cj)).collect());
    assert!((va - vb).abs() < 3.0 * sa.hypot(sb), "ledger {va} vs plain {vb}");
}

#[test]
fn missing_ledger_is_a_state_error() {
    let g = GridSpec::for_scale(3.0, Rect::unit()).unwrap();
    let f = sample_psi(3.0, &g, TruncationParams::default(), 1, None).unwrap();
    assert!(matches!(resample_component(&f, Component::Coarse, 2), Err(FieldError::State(_))));
    let l = ledger_sample(5);
    assert!(resample_component(&l, Component::Block(40, 40), 2).is_err());
}
