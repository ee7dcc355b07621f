//! Block decomposition of `psi_{0,n}` with retained white noise.
//!
//! Octaves `j < K` form the coarse part `psi_{0,K}`; its noise is kept whole.
//! Octaves `j >= K` live on the target lattice and their noise is cut into the
//! blocks of side `2^-K`. A block's field is the convolution of its own noise
//! and is stored as a window around the block. The sample values are defined as
//! the coarse field plus the block windows summed in block order, so the
//! decomposition is exact and resampling one component leaves the others
//! untouched.

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::fft::{good_size, Fft2};
use crate::kernel::TruncationParams;
use crate::sampler::{kernel_table, kernel_taps, quarter_index, FieldSample, KernelFamily, Sampler, SamplerOptions, DIRECT_TAPS};
use crate::seed::{derive_seed, rng};
use crate::{FieldError, Result};

const TAG_BLOCK: u64 = 0x626c_6f63;

/// A resampling target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Component {
    Coarse,
    /// Block `[bx 2^-K, (bx+1) 2^-K) x [by 2^-K, (by+1) 2^-K)`.
    Block(i64, i64),
}

/// White noise of one component, one lattice per (level, slice).
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSlab {
    pub(crate) parts: Vec<Vec<f64>>,
}

impl NoiseSlab {
    /// Total number of stored normals.
    pub fn len(&self) -> usize {
        self.parts.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

enum WindowPlan {
    Direct(Vec<Vec<(i32, i32, f64)>>),
    Fft { fft: Fft2, tables: Vec<Vec<f64>> },
}

struct FineLevel {
    level: usize,
    plan: WindowPlan,
}

struct Inner {
    sampler: Sampler,
    k: u32,
    /// Target-lattice nodes per block side.
    bsize: i64,
    coarse: Vec<usize>,
    fine: Vec<FineLevel>,
    wpad: usize,
    blocks: Vec<(i64, i64)>,
}

/// Domain-index window of a block field.
#[derive(Clone)]
struct Window {
    x0: usize,
    y0: usize,
    nx: usize,
    ny: usize,
    data: Vec<f64>,
}

struct BlockState {
    slab: NoiseSlab,
    window: Window,
}

struct CoarseState {
    slab: NoiseSlab,
    values: Vec<f64>,
}

/// Retained noise and component fields of a ledger sample.
pub struct NoiseLedger {
    inner: Arc<Inner>,
    coarse: Arc<CoarseState>,
    blocks: BTreeMap<(i64, i64), Arc<BlockState>>,
}

impl fmt::Debug for NoiseLedger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NoiseLedger").field("k", &self.inner.k).field("blocks", &self.blocks.len()).finish()
    }
}

/// Sampler for `psi_{0,n}` that keeps a noise ledger at block scale `K`.
#[derive(Clone)]
pub struct LedgerSampler {
    inner: Arc<Inner>,
}

impl LedgerSampler {
    pub fn new(n: f64, k: u32, grid: crate::GridSpec, trunc: TruncationParams, opts: SamplerOptions) -> Result<Self> {
        if k as f64 > n {
            return Err(FieldError::Domain(format!("ledger block scale K={k} exceeds n={n}")));
        }
        let m = grid.m as i64;
        if m.count_ones() != 1 || m < (1i64 << k) {
            return Err(FieldError::Config(format!("ledger needs a power-of-two m >= 2^K, got m={m}, K={k}")));
        }
        let sampler = Sampler::build(vec![KernelFamily::Truncated(trunc)], 0.0, n, grid, opts, Some(k))?;
        let bsize = m >> k;
        let fam = sampler.families[0];
        let mut coarse = Vec::new();
        let mut fine = Vec::new();
        let mut wpad = 0;
        let mut blocks = std::collections::BTreeSet::new();
        for (li, level) in sampler.levels.iter().enumerate() {
            if level.j < k as i32 {
                coarse.push(li);
                continue;
            }
            debug_assert_eq!(level.e, 0);
            wpad = wpad.max(level.pad);
            let widest = level.slices.iter().copied().fold(level.slices[0], |a, b| if b.t_mid > a.t_mid { b } else { a });
            let plan = if kernel_taps(&fam, &widest, level.hl, level.pad).len() <= DIRECT_TAPS {
                WindowPlan::Direct(level.slices.iter().map(|s| kernel_taps(&fam, s, level.hl, level.pad)).collect())
            } else {
                let w = good_size(bsize as usize + 2 * level.pad);
                let fft = Fft2::new(w, w);
                let tables = level.slices.iter().map(|s| kernel_table(&fam, s, level.hl, &fft)).collect();
                WindowPlan::Fft { fft, tables }
            };
            let (x0, x1) = (level.ox, level.ox + level.tnx as i64 - 1);
            let (y0, y1) = (level.oy, level.oy + level.tny as i64 - 1);
            for by in y0.div_euclid(bsize)..=y1.div_euclid(bsize) {
                for bx in x0.div_euclid(bsize)..=x1.div_euclid(bsize) {
                    blocks.insert((bx, by));
                }
            }
            fine.push(FineLevel { level: li, plan });
        }
        Ok(LedgerSampler {
            inner: Arc::new(Inner { sampler, k, bsize, coarse, fine, wpad, blocks: blocks.into_iter().collect() }),
        })
    }

    /// All blocks carrying fine noise, including those in the padding.
    pub fn blocks(&self) -> &[(i64, i64)] {
        &self.inner.blocks
    }

    pub fn sample(&self, seed: u64) -> FieldSample {
        let inner = &self.inner;
        let coarse_slab = inner.coarse_noise(seed);
        let coarse = Arc::new(CoarseState { values: inner.coarse_values(&coarse_slab), slab: coarse_slab });
        let blocks = inner
            .blocks
            .iter()
            .map(|&b| {
                let slab = inner.block_noise(b, seed);
                let window = inner.block_window(b, &slab);
                (b, Arc::new(BlockState { slab, window }))
            })
            .collect();
        let ledger = NoiseLedger { inner: inner.clone(), coarse, blocks };
        let values = ledger.total();
        FieldSample {
            grid: inner.sampler.grid,
            values,
            scale_lo: 0.0,
            scale_hi: inner.sampler.n,
            kind: crate::FieldKind::Psi,
            seed,
            ledger: Some(Arc::new(ledger)),
        }
    }
}

impl Inner {
    fn coarse_noise(&self, seed: u64) -> NoiseSlab {
        let mut parts = Vec::new();
        for &li in &self.coarse {
            let level = &self.sampler.levels[li];
            for s in 0..level.slices.len() {
                parts.push(self.sampler.slice_noise(level, s, seed));
            }
        }
        NoiseSlab { parts }
    }

    fn coarse_values(&self, slab: &NoiseSlab) -> Vec<f64> {
        let mut out = vec![0.0; self.sampler.grid.len()];
        let mut off = 0;
        for &li in &self.coarse {
            let level = &self.sampler.levels[li];
            let ns = level.slices.len();
            let fields = self.sampler.level_fields(level, 0, Some(&slab.parts[off..off + ns]));
            self.sampler.accumulate(level, &fields[0], &mut out);
            off += ns;
        }
        out
    }

    /// Absolute node range `[x0, x1) x [y0, y1)` of block `b` within a fine level's noise.
    fn patch(&self, f: &FineLevel, b: (i64, i64)) -> (i64, i64, i64, i64) {
        let level = &self.sampler.levels[f.level];
        let x0 = (b.0 * self.bsize).max(level.ox);
        let x1 = ((b.0 + 1) * self.bsize).min(level.ox + level.tnx as i64);
        let y0 = (b.1 * self.bsize).max(level.oy);
        let y1 = ((b.1 + 1) * self.bsize).min(level.oy + level.tny as i64);
        (x0, x1.max(x0), y0, y1.max(y0))
    }

    fn block_noise(&self, b: (i64, i64), seed: u64) -> NoiseSlab {
        let mut parts = Vec::new();
        for f in &self.fine {
            let level = &self.sampler.levels[f.level];
            let (x0, x1, y0, y1) = self.patch(f, b);
            let len = ((x1 - x0) * (y1 - y0)) as usize;
            for s in 0..level.slices.len() {
                let mut r = rng(derive_seed(seed, &[TAG_BLOCK, b.0 as u64, b.1 as u64, level.j as u64, s as u64]));
                parts.push((0..len).map(|_| r.sample::<f64, _>(StandardNormal)).collect());
            }
        }
        NoiseSlab { parts }
    }

    fn block_window(&self, b: (i64, i64), slab: &NoiseSlab) -> Window {
        let grid = &self.sampler.grid;
        let (gx0, gy0) = grid.origin();
        let (gnx, gny) = (grid.nx() as i64, grid.ny() as i64);
        let wp = self.wpad as i64;
        // Absolute window bounds, clipped to the target grid.
        let ax0 = (b.0 * self.bsize - wp).max(gx0);
        let ax1 = ((b.0 + 1) * self.bsize + wp).min(gx0 + gnx);
        let ay0 = (b.1 * self.bsize - wp).max(gy0);
        let ay1 = ((b.1 + 1) * self.bsize + wp).min(gy0 + gny);
        let (wnx, wny) = ((ax1 - ax0).max(0) as usize, (ay1 - ay0).max(0) as usize);
        let mut w = Window { x0: (ax0 - gx0).max(0) as usize, y0: (ay0 - gy0).max(0) as usize, nx: wnx, ny: wny, data: vec![0.0; wnx * wny] };
        if wnx == 0 || wny == 0 {
            return w;
        }
        let mut off = 0;
        for f in &self.fine {
            let level = &self.sampler.levels[f.level];
            let ns = level.slices.len();
            let (px0, px1, py0, py1) = self.patch(f, b);
            let pnx = (px1 - px0) as usize;
            if pnx == 0 || py1 == py0 {
                off += ns;
                continue;
            }
            let parts = &slab.parts[off..off + ns];
            off += ns;
            match &f.plan {
                WindowPlan::Direct(taps) => {
                    for (s, taps) in taps.iter().enumerate() {
                        let noise = &parts[s];
                        for &(dx, dy, wt) in taps {
                            let (dx, dy) = (dx as i64, dy as i64);
                            let ox0 = (px0 + dx).max(ax0);
                            let ox1 = (px1 + dx).min(ax1);
                            if ox1 <= ox0 {
                                continue;
                            }
                            let len = (ox1 - ox0) as usize;
                            for yn in py0..py1 {
                                let y = yn + dy;
                                if y < ay0 || y >= ay1 {
                                    continue;
                                }
                                let src_off = ((yn - py0) as usize) * pnx + (ox0 - dx - px0) as usize;
                                let dst_off = ((y - ay0) as usize) * wnx + (ox0 - ax0) as usize;
                                let src = &noise[src_off..src_off + len];
                                let dst = &mut w.data[dst_off..dst_off + len];
                                for (d, v) in dst.iter_mut().zip(src) {
                                    *d += wt * v;
                                }
                            }
                        }
                    }
                }
                WindowPlan::Fft { fft, tables } => {
                    let (tn, pad) = (fft.nx, level.pad as i64);
                    let (tx0, ty0) = (b.0 * self.bsize - pad, b.1 * self.bsize - pad);
                    let mut acc = vec![Complex64::new(0.0, 0.0); tn * tn];
                    let mut tmp = Vec::new();
                    let mut s = 0;
                    while s < ns {
                        let pair = s + 1 < ns;
                        let mut z = vec![Complex64::new(0.0, 0.0); tn * tn];
                        for yn in py0..py1 {
                            let row = ((yn - ty0) as usize) * tn + (px0 - tx0) as usize;
                            let src = ((yn - py0) as usize) * pnx;
                            for i in 0..pnx {
                                let b_im = if pair { parts[s + 1][src + i] } else { 0.0 };
                                z[row + i] = Complex64::new(parts[s][src + i], b_im);
                            }
                        }
                        fft.forward_t(&mut z, &mut tmp);
                        for kx in 0..tn {
                            for ky in 0..tn {
                                let q = quarter_index(kx, ky, tn, tn);
                                let ka = tables[s][q];
                                let kb = if pair { tables[s + 1][q] } else { 0.0 };
                                let idx = kx * tn + ky;
                                acc[idx] += z[idx] * Complex64::new(ka, -kb);
                            }
                        }
                        s += if pair { 2 } else { 1 };
                    }
                    fft.inverse_t(&mut acc, &mut tmp);
                    let inv = 1.0 / (tn * tn) as f64;
                    let span = self.bsize + 2 * pad;
                    let (ux0, ux1) = ((ax0 - tx0).max(0), (ax1 - tx0).min(span));
                    let (uy0, uy1) = ((ay0 - ty0).max(0), (ay1 - ty0).min(span));
                    for uy in uy0..uy1 {
                        let dst_row = ((ty0 + uy - ay0) as usize) * wnx;
                        for ux in ux0..ux1 {
                            w.data[dst_row + (tx0 + ux - ax0) as usize] += acc[(uy as usize) * tn + ux as usize].re * inv;
                        }
                    }
                }
            }
        }
        w
    }
}

impl NoiseLedger {
    pub fn k(&self) -> u32 {
        self.inner.k
    }

    pub fn blocks(&self) -> Vec<(i64, i64)> {
        self.blocks.keys().copied().collect()
    }

    /// The coarse field `psi_{0,K}` on the target grid.
    pub fn coarse_values(&self) -> &[f64] {
        &self.coarse.values
    }

    /// Field of one block expanded to the full target grid.
    pub fn block_values(&self, b: (i64, i64)) -> Option<Vec<f64>> {
        let st = self.blocks.get(&b)?;
        let nx = self.inner.sampler.grid.nx();
        let mut out = vec![0.0; self.inner.sampler.grid.len()];
        let w = &st.window;
        for y in 0..w.ny {
            for x in 0..w.nx {
                out[(w.y0 + y) * nx + w.x0 + x] = w.data[y * w.nx + x];
            }
        }
        Some(out)
    }

    /// Grid index rectangle `(x0, y0, nx, ny)` outside which block `b` contributes nothing.
    pub fn block_extent(&self, b: (i64, i64)) -> Option<(usize, usize, usize, usize)> {
        self.blocks.get(&b).map(|s| (s.window.x0, s.window.y0, s.window.nx, s.window.ny))
    }

    pub fn slab(&self, c: Component) -> Result<NoiseSlab> {
        match c {
            Component::Coarse => Ok(self.coarse.slab.clone()),
            Component::Block(bx, by) => self
                .blocks
                .get(&(bx, by))
                .map(|s| s.slab.clone())
                .ok_or_else(|| FieldError::Domain(format!("no block ({bx}, {by}) in the ledger"))),
        }
    }

    /// Coarse field plus block windows, summed in block order.
    fn total(&self) -> Vec<f64> {
        let nx = self.inner.sampler.grid.nx();
        let mut out = self.coarse.values.clone();
        for st in self.blocks.values() {
            let w = &st.window;
            for y in 0..w.ny {
                let dst = &mut out[(w.y0 + y) * nx + w.x0..(w.y0 + y) * nx + w.x0 + w.nx];
                for (d, v) in dst.iter_mut().zip(&w.data[y * w.nx..(y + 1) * w.nx]) {
                    *d += v;
                }
            }
        }
        out
    }

    fn with_component(&self, c: Component, slab: NoiseSlab) -> Result<NoiseLedger> {
        let inner = &self.inner;
        let mut next = NoiseLedger { inner: inner.clone(), coarse: self.coarse.clone(), blocks: self.blocks.clone() };
        let expected = self.slab(c)?;
        if expected.parts.len() != slab.parts.len() || expected.parts.iter().zip(&slab.parts).any(|(a, b)| a.len() != b.len()) {
            return Err(FieldError::Domain(format!("noise slab shape does not match component {c:?}")));
        }
        match c {
            Component::Coarse => {
                next.coarse = Arc::new(CoarseState { values: inner.coarse_values(&slab), slab });
            }
            Component::Block(bx, by) => {
                let window = inner.block_window((bx, by), &slab);
                next.blocks.insert((bx, by), Arc::new(BlockState { slab, window }));
            }
        }
        Ok(next)
    }
}

fn ledger_of(field: &FieldSample) -> Result<&NoiseLedger> {
    field
        .ledger
        .as_deref()
        .ok_or_else(|| FieldError::State("field carries no noise ledger; sample it with a block scale".into()))
}

fn rebuild(field: &FieldSample, ledger: NoiseLedger) -> FieldSample {
    FieldSample {
        grid: field.grid,
        values: ledger.total(),
        scale_lo: field.scale_lo,
        scale_hi: field.scale_hi,
        kind: field.kind,
        seed: field.seed,
        ledger: Some(Arc::new(ledger)),
    }
}

/// Replaces the noise of one component by an independent copy drawn from `seed`.
pub fn resample_component(field: &FieldSample, c: Component, seed: u64) -> Result<FieldSample> {
    let ledger = ledger_of(field)?;
    let inner = &ledger.inner;
    let slab = match c {
        Component::Coarse => inner.coarse_noise(seed),
        Component::Block(bx, by) => {
            if !ledger.blocks.contains_key(&(bx, by)) {
                return Err(FieldError::Domain(format!("no block ({bx}, {by}) in the ledger")));
            }
            inner.block_noise((bx, by), seed)
        }
    };
    Ok(rebuild(field, ledger.with_component(c, slab)?))
}

/// Puts a previously extracted slab back into a component.
pub fn replace_component(field: &FieldSample, c: Component, slab: NoiseSlab) -> Result<FieldSample> {
    let ledger = ledger_of(field)?;
    Ok(rebuild(field, ledger.with_component(c, slab)?))
}
