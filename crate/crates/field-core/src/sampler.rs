//! Octave-by-octave synthesis of `phi_{k,n}` and its truncated variant `psi`.
//!
//! Octave `j` covers times `[2^{-2(j+1)}, 2^{-2j}]` and is split into `S`
//! log-uniform slices. Each slice convolves an independent white-noise lattice
//! (cell values `N(0,1)/h_l`) with `sqrt(pi dt) p_{t_mid/2}`, truncated by the
//! bump for `psi`. An octave lives on its own lattice of spacing `h_l = h 2^e`,
//! chosen so the narrowest kernel of the octave spans several cells, with a
//! torus padded by the kernel radius. Coarse lattices are interpolated onto the
//! target grid with Catmull-Rom weights.
//!
//! In [`SliceMode::Aggregated`] the slices of an octave are merged into one
//! spectral filter `sqrt(sum_s |K_s|^2)` applied to a single complex white
//! noise. The result has exactly the law of the slice sum and costs one FFT
//! per octave; it is the default for `phi`. [`SliceMode::Independent`] keeps
//! one spatial noise lattice per slice, which is what coupling and block
//! resampling need.

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::fft::{good_size, Fft2};
use crate::grid::GridSpec;
use crate::kernel::{gaussian_padding, octave_schedule, slice_kernel, Slice, TruncationParams};
use crate::ledger::{LedgerSampler, NoiseLedger};
use crate::seed::{derive_seed, rng};
use crate::{FieldError, Result};

pub(crate) const TAG_NOISE: u64 = 0x6e6f_6973;
pub(crate) const TAG_SPECTRAL: u64 = 0x7370_6563;

/// Lattice spacing must stay below the narrowest Gaussian std divided by this.
const RES_HEAT: f64 = 5.5;
/// Lattice spacing must stay below the narrowest truncation radius divided by this.
const RES_TRUNC: f64 = 4.0;
/// Truncated kernels with at most this many taps are convolved directly.
pub(crate) const DIRECT_TAPS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    Phi,
    Psi,
    GffMollified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KernelFamily {
    /// `sqrt(pi) p_{t/2}`.
    Heat,
    /// `sqrt(pi) p_{t/2} Phi(|x| / sigma_t)`.
    Truncated(TruncationParams),
}

impl KernelFamily {
    fn trunc(&self) -> Option<&TruncationParams> {
        match self {
            KernelFamily::Heat => None,
            KernelFamily::Truncated(tp) => Some(tp),
        }
    }

    /// Radius outside which the slice kernel is negligible (or zero).
    fn radius(&self, t: f64) -> f64 {
        match self {
            KernelFamily::Heat => gaussian_padding(t),
            KernelFamily::Truncated(tp) => tp.support(t).min(gaussian_padding(t)),
        }
    }

    /// Narrowest feature of the slice kernel, used to choose the lattice.
    fn feature(&self, t: f64) -> f64 {
        let gauss = (t / 2.0).sqrt() / RES_HEAT;
        match self {
            KernelFamily::Heat => gauss,
            KernelFamily::Truncated(tp) => gauss.min(tp.sigma(t) / RES_TRUNC),
        }
    }

    pub fn kind(&self) -> FieldKind {
        match self {
            KernelFamily::Heat => FieldKind::Phi,
            KernelFamily::Truncated(_) => FieldKind::Psi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SliceMode {
    Aggregated,
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerOptions {
    /// Time slices per octave.
    pub slices: usize,
    pub mode: SliceMode,
    /// Test hook: replace the truncation bump by 1 so `psi` reduces to `phi`.
    pub unit_bump: bool,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions { slices: 8, mode: SliceMode::Aggregated, unit_bump: false }
    }
}

/// A sampled field on a [`GridSpec`], row-major with `nx` values per row.
#[derive(Debug, Clone)]
pub struct FieldSample {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub scale_lo: f64,
    pub scale_hi: f64,
    pub kind: FieldKind,
    pub seed: u64,
    pub(crate) ledger: Option<Arc<NoiseLedger>>,
}

impl FieldSample {
    pub fn new(grid: GridSpec, values: Vec<f64>, scale_lo: f64, scale_hi: f64, kind: FieldKind, seed: u64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(FieldError::Domain(format!("{} values for a grid of {} nodes", values.len(), grid.len())));
        }
        Ok(FieldSample { grid, values, scale_lo, scale_hi, kind, seed, ledger: None })
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        FieldSample { values: vec![c; grid.len()], grid, scale_lo: 0.0, scale_hi: 0.0, kind: FieldKind::Phi, seed: 0, ledger: None }
    }

    /// Field from a function of plane coordinates.
    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: GridSpec, f: F) -> Self {
        let (nx, ny) = (grid.nx(), grid.ny());
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (x, y) = grid.position(i, j);
                values.push(f(x, y));
            }
        }
        FieldSample { values, grid, scale_lo: 0.0, scale_hi: 0.0, kind: FieldKind::Phi, seed: 0, ledger: None }
    }

    pub fn nx(&self) -> usize {
        self.grid.nx()
    }

    pub fn ny(&self) -> usize {
        self.grid.ny()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx() + i]
    }

    /// Value at the node nearest to `(x, y)`.
    pub fn at_point(&self, x: f64, y: f64) -> f64 {
        let (i, j) = self.grid.nearest(x, y);
        self.at(i, j)
    }

    pub fn has_ledger(&self) -> bool {
        self.ledger.is_some()
    }

    pub fn ledger(&self) -> Option<&NoiseLedger> {
        self.ledger.as_deref()
    }

    /// Drops the ledger, keeping the values.
    pub fn without_ledger(mut self) -> Self {
        self.ledger = None;
        self
    }
}

/// How a level turns noise into its octave field.
pub(crate) enum Method {
    Fft { fft: Arc<Fft2>, spectra: Vec<Spectrum> },
    Direct { taps: Vec<Vec<Vec<(i32, i32, f64)>>> },
}

/// Per-family spectral data of one level.
pub(crate) enum Spectrum {
    /// Per slice: amplitude and separable Gaussian factors.
    Separable(Vec<(f64, Vec<f64>, Vec<f64>)>),
    /// Per slice: quarter table of the real, even kernel DFT.
    Table(Vec<Vec<f64>>),
    /// Aggregated filter `sqrt(sum_s K_s^2)` as a quarter table.
    Aggregated(Vec<f64>),
}

/// Octave `j` on a lattice of spacing `h 2^e`.
pub(crate) struct Level {
    pub j: i32,
    pub slices: Vec<Slice>,
    pub e: u32,
    pub hl: f64,
    /// Kernel radius in lattice cells.
    pub pad: usize,
    /// Absolute lattice index of torus node (0, 0).
    pub ox: i64,
    pub oy: i64,
    pub tnx: usize,
    pub tny: usize,
    /// Output region: torus nodes `[pad, pad + rnx) x [pad, pad + rny)`.
    pub rnx: usize,
    pub rny: usize,
    pub method: Method,
    pub interp_x: Vec<(usize, [f64; 4])>,
    pub interp_y: Vec<(usize, [f64; 4])>,
}

/// Reusable sampler for one configuration; kernel spectra are built once.
pub struct Sampler {
    pub(crate) families: Vec<KernelFamily>,
    pub(crate) k: f64,
    pub(crate) n: f64,
    pub(crate) grid: GridSpec,
    pub(crate) opts: SamplerOptions,
    pub(crate) levels: Vec<Level>,
}

fn catmull_rom(f: f64) -> [f64; 4] {
    let f2 = f * f;
    let f3 = f2 * f;
    [
        0.5 * (-f3 + 2.0 * f2 - f),
        0.5 * (3.0 * f3 - 5.0 * f2 + 2.0),
        0.5 * (-3.0 * f3 + 4.0 * f2 + f),
        0.5 * (f3 - f2),
    ]
}

/// Interpolation plan along one axis for target nodes `i0..i0+n` (fine index).
fn axis_plan(i0: i64, n: usize, e: u32, lo: i64) -> Vec<(usize, [f64; 4])> {
    let step = 1i64 << e;
    (0..n as i64)
        .map(|i| {
            let ia = i0 + i;
            let base = ia.div_euclid(step);
            let frac = ia.rem_euclid(step) as f64 / step as f64;
            if e == 0 {
                ((base - lo) as usize, [0.0, 1.0, 0.0, 0.0])
            } else {
                ((base - 1 - lo) as usize, catmull_rom(frac))
            }
        })
        .collect()
}

#[inline]
pub(crate) fn quarter_index(kx: usize, ky: usize, nx: usize, ny: usize) -> usize {
    let qx = kx.min(nx - kx);
    let qy = ky.min(ny - ky);
    qx * (ny / 2 + 1) + qy
}

#[inline]
fn wrapped_omega(k: usize, n: usize, hl: f64) -> f64 {
    let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
    2.0 * PI * kk / (n as f64 * hl)
}

/// Kernel offsets `(dx, dy, weight)` within the support, scaled by `h_l sqrt(dt)`.
pub(crate) fn kernel_taps(fam: &KernelFamily, s: &Slice, hl: f64, pad: usize) -> Vec<(i32, i32, f64)> {
    let mut taps = Vec::new();
    let p = pad as i32;
    let amp = hl * s.dt.sqrt();
    for dy in -p..=p {
        for dx in -p..=p {
            let r = hl * ((dx * dx + dy * dy) as f64).sqrt();
            let w = slice_kernel(s.t_mid, r, fam.trunc());
            if w != 0.0 {
                taps.push((dx, dy, amp * w));
            }
        }
    }
    taps
}

/// Quarter table of the DFT of the wrapped, sampled kernel on an `nx x ny` torus.
pub(crate) fn kernel_table(fam: &KernelFamily, s: &Slice, hl: f64, fft: &Fft2) -> Vec<f64> {
    let (nx, ny) = (fft.nx, fft.ny);
    let amp = hl * s.dt.sqrt();
    let mut data = vec![Complex64::new(0.0, 0.0); nx * ny];
    for iy in 0..ny {
        let dy = if iy <= ny / 2 { iy as f64 } else { iy as f64 - ny as f64 };
        for ix in 0..nx {
            let dx = if ix <= nx / 2 { ix as f64 } else { ix as f64 - nx as f64 };
            let r = hl * dx.hypot(dy);
            data[iy * nx + ix] = Complex64::new(amp * slice_kernel(s.t_mid, r, fam.trunc()), 0.0);
        }
    }
    let mut tmp = Vec::new();
    fft.forward_t(&mut data, &mut tmp);
    let nyq = ny / 2 + 1;
    let mut table = vec![0.0; (nx / 2 + 1) * nyq];
    for kx in 0..=nx / 2 {
        for ky in 0..nyq {
            table[kx * nyq + ky] = data[kx * ny + ky].re;
        }
    }
    table
}

fn separable_factors(s: &Slice, hl: f64, nx: usize, ny: usize) -> (f64, Vec<f64>, Vec<f64>) {
    let amp = (PI * s.dt).sqrt() / hl;
    let gx = (0..nx).map(|k| (-s.t_mid * wrapped_omega(k, nx, hl).powi(2) / 4.0).exp()).collect();
    let gy = (0..ny).map(|k| (-s.t_mid * wrapped_omega(k, ny, hl).powi(2) / 4.0).exp()).collect();
    (amp, gx, gy)
}

impl Spectrum {
    /// Real kernel DFT of slice `s` at transposed position `(kx, ky)`.
    #[inline]
    fn slice_value(&self, s: usize, kx: usize, ky: usize, nx: usize, ny: usize) -> f64 {
        match self {
            Spectrum::Separable(v) => {
                let (a, gx, gy) = &v[s];
                a * gx[kx] * gy[ky]
            }
            Spectrum::Table(v) => v[s][quarter_index(kx, ky, nx, ny)],
            Spectrum::Aggregated(_) => unreachable!("aggregated spectra have no slices"),
        }
    }
}

impl Sampler {
    /// Builds a sampler producing one field per kernel family, all driven by the
    /// same noise.
    pub fn new(families: Vec<KernelFamily>, k: f64, n: f64, grid: GridSpec, opts: SamplerOptions) -> Result<Self> {
        Self::build(families, k, n, grid, opts, None)
    }

    pub(crate) fn build(
        families: Vec<KernelFamily>,
        k: f64,
        n: f64,
        grid: GridSpec,
        mut opts: SamplerOptions,
        ledger_k: Option<u32>,
    ) -> Result<Self> {
        if !(k >= 0.0 && n >= k) {
            return Err(FieldError::Domain(format!("scales need 0 <= k <= n, got k={k}, n={n}")));
        }
        if n > grid.max_scale() + 1e-9 {
            return Err(FieldError::Config(format!(
                "grid with m={} resolves scales up to {}, requested n={n}; need m >= 2^(n+2)",
                grid.m,
                grid.max_scale()
            )));
        }
        if opts.slices == 0 {
            return Err(FieldError::Config("slices per octave must be positive".into()));
        }
        for f in &families {
            if let KernelFamily::Truncated(tp) = f {
                tp.validate()?;
            }
        }
        let families: Vec<KernelFamily> = if opts.unit_bump {
            families.iter().map(|_| KernelFamily::Heat).collect()
        } else {
            families
        };
        if families.len() > 1 || ledger_k.is_some() {
            opts.mode = SliceMode::Independent;
        }
        let h = grid.h();
        let (gx0, gy0) = grid.origin();
        let (nx, ny) = (grid.nx(), grid.ny());
        let mut levels = Vec::new();
        for (j, slices) in octave_schedule(k, n, opts.slices) {
            let t_hi = slices.iter().map(|s| s.t_mid).fold(0.0, f64::max);
            let radius = families
                .iter()
                .map(|f| slices.iter().map(|s| f.radius(s.t_mid)).fold(0.0, f64::max).max(f.radius(t_hi)))
                .fold(0.0, f64::max);
            if radius > grid.padding + 1e-12 {
                return Err(FieldError::Config(format!(
                    "padding {} is below the kernel radius {radius} of octave {j}",
                    grid.padding
                )));
            }
            let feature = families
                .iter()
                .flat_map(|f| slices.iter().map(move |s| f.feature(s.t_mid)))
                .fold(f64::INFINITY, f64::min);
            let forced_fine = ledger_k.map_or(false, |kk| j >= kk as i32);
            let e = if forced_fine || feature <= h {
                0
            } else {
                (feature / h).log2().floor().max(0.0) as u32
            };
            let hl = h * (1u64 << e) as f64;
            let pad = (radius / hl).ceil() as usize + 1;
            let (lo_m, hi_m) = if e == 0 { (0, 0) } else { (1, 2) };
            let step = 1i64 << e;
            let lx0 = gx0.div_euclid(step) - lo_m;
            let lx1 = (gx0 + nx as i64 - 1).div_euclid(step) + hi_m;
            let ly0 = gy0.div_euclid(step) - lo_m;
            let ly1 = (gy0 + ny as i64 - 1).div_euclid(step) + hi_m;
            let rnx = (lx1 - lx0 + 1) as usize;
            let rny = (ly1 - ly0 + 1) as usize;
            let all_trunc = families.iter().all(|f| matches!(f, KernelFamily::Truncated(_)));
            let ntaps = (2 * pad + 1).pow(2);
            let direct = all_trunc && opts.mode == SliceMode::Independent && {
                // Count nonzero taps of the widest slice.
                let widest = slices.iter().copied().fold(slices[0], |a, b| if b.t_mid > a.t_mid { b } else { a });
                kernel_taps(&families[0], &widest, hl, pad).len() <= DIRECT_TAPS || ntaps <= DIRECT_TAPS
            };
            let (tnx, tny) = if direct || forced_fine {
                (rnx + 2 * pad, rny + 2 * pad)
            } else {
                (good_size(rnx + 2 * pad), good_size(rny + 2 * pad))
            };
            let method = if direct {
                let taps = families
                    .iter()
                    .map(|f| slices.iter().map(|s| kernel_taps(f, s, hl, pad)).collect())
                    .collect();
                Method::Direct { taps }
            } else if forced_fine {
                // Block fields are convolved per block; the full torus is never used.
                Method::Direct { taps: Vec::new() }
            } else {
                let fft = Arc::new(Fft2::new(tnx, tny));
                let spectra = families
                    .iter()
                    .map(|f| {
                        let per_slice_sep = || slices.iter().map(|s| separable_factors(s, hl, tnx, tny)).collect::<Vec<_>>();
                        let per_slice_tab = || slices.iter().map(|s| kernel_table(f, s, hl, &fft)).collect::<Vec<_>>();
                        match (opts.mode, f) {
                            (SliceMode::Independent, KernelFamily::Heat) => Spectrum::Separable(per_slice_sep()),
                            (SliceMode::Independent, KernelFamily::Truncated(_)) => Spectrum::Table(per_slice_tab()),
                            (SliceMode::Aggregated, _) => {
                                let nyq = tny / 2 + 1;
                                let mut agg = vec![0.0; (tnx / 2 + 1) * nyq];
                                let per: Spectrum = match f {
                                    KernelFamily::Heat => Spectrum::Separable(per_slice_sep()),
                                    KernelFamily::Truncated(_) => Spectrum::Table(per_slice_tab()),
                                };
                                for kx in 0..=tnx / 2 {
                                    for ky in 0..nyq {
                                        let mut acc = 0.0;
                                        for s in 0..slices.len() {
                                            let v = per.slice_value(s, kx, ky, tnx, tny);
                                            acc += v * v;
                                        }
                                        agg[kx * nyq + ky] = acc.sqrt();
                                    }
                                }
                                Spectrum::Aggregated(agg)
                            }
                        }
                    })
                    .collect();
                Method::Fft { fft, spectra }
            };
            let interp_x = axis_plan(gx0, nx, e, lx0);
            let interp_y = axis_plan(gy0, ny, e, ly0);
            levels.push(Level {
                j,
                slices,
                e,
                hl,
                pad,
                ox: lx0 - pad as i64,
                oy: ly0 - pad as i64,
                tnx,
                tny,
                rnx,
                rny,
                method,
                interp_x,
                interp_y,
            });
        }
        Ok(Sampler { families, k, n, grid, opts, levels })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Number of lattice nodes touched per sample, summed over levels.
    pub fn work_estimate(&self) -> usize {
        self.levels.iter().map(|l| l.tnx * l.tny * l.slices.len().max(1)).sum()
    }

    /// Noise lattice of `(level, slice)` for a given seed, row-major over the torus.
    pub(crate) fn slice_noise(&self, level: &Level, s: usize, seed: u64) -> Vec<f64> {
        let mut r = rng(derive_seed(seed, &[TAG_NOISE, level.j as u64, s as u64]));
        (0..level.tnx * level.tny).map(|_| r.sample::<f64, _>(StandardNormal)).collect()
    }

    /// Octave fields of one level on its output region, one per family.
    pub(crate) fn level_fields(&self, level: &Level, seed: u64, noise: Option<&[Vec<f64>]>) -> Vec<Vec<f64>> {
        let nf = self.families.len();
        let region = level.rnx * level.rny;
        match &level.method {
            Method::Direct { taps } => {
                let mut outs = vec![vec![0.0; region]; nf];
                for s in 0..level.slices.len() {
                    let owned;
                    let w: &[f64] = match noise {
                        Some(nz) => &nz[s],
                        None => {
                            owned = self.slice_noise(level, s, seed);
                            &owned
                        }
                    };
                    for (f, out) in outs.iter_mut().enumerate() {
                        direct_accumulate(out, w, &taps[f][s], level);
                    }
                }
                outs
            }
            Method::Fft { fft, spectra } => {
                let (tnx, tny) = (level.tnx, level.tny);
                let n = tnx * tny;
                let mut tmp = Vec::with_capacity(n);
                let mut accs: Vec<Vec<Complex64>> = Vec::with_capacity(nf);
                if self.opts.mode == SliceMode::Aggregated {
                    let mut r = rng(derive_seed(seed, &[TAG_SPECTRAL, level.j as u64]));
                    let sc = (n as f64).sqrt();
                    for (f, sp) in spectra.iter().enumerate() {
                        let Spectrum::Aggregated(agg) = sp else { unreachable!() };
                        // One complex white noise per family; families share it.
                        let z: Vec<Complex64> = if f == 0 {
                            (0..n)
                                .map(|_| Complex64::new(sc * r.sample::<f64, _>(StandardNormal), sc * r.sample::<f64, _>(StandardNormal)))
                                .collect()
                        } else {
                            accs[0].clone()
                        };
                        let mut a = z;
                        for kx in 0..tnx {
                            for ky in 0..tny {
                                a[kx * tny + ky] *= agg[quarter_index(kx, ky, tnx, tny)];
                            }
                        }
                        accs.push(a);
                    }
                } else {
                    accs = vec![vec![Complex64::new(0.0, 0.0); n]; nf];
                    let ns = level.slices.len();
                    let mut s = 0;
                    while s < ns {
                        let pair = s + 1 < ns;
                        let mut z: Vec<Complex64> = match noise {
                            Some(nz) => {
                                if pair {
                                    nz[s].iter().zip(&nz[s + 1]).map(|(&a, &b)| Complex64::new(a, b)).collect()
                                } else {
                                    nz[s].iter().map(|&a| Complex64::new(a, 0.0)).collect()
                                }
                            }
                            None => {
                                let wa = self.slice_noise(level, s, seed);
                                if pair {
                                    let wb = self.slice_noise(level, s + 1, seed);
                                    wa.iter().zip(&wb).map(|(&a, &b)| Complex64::new(a, b)).collect()
                                } else {
                                    wa.iter().map(|&a| Complex64::new(a, 0.0)).collect()
                                }
                            }
                        };
                        fft.forward_t(&mut z, &mut tmp);
                        for (f, acc) in accs.iter_mut().enumerate() {
                            let sp = &spectra[f];
                            for kx in 0..tnx {
                                for ky in 0..tny {
                                    let idx = kx * tny + ky;
                                    let ka = sp.slice_value(s, kx, ky, tnx, tny);
                                    let kb = if pair { sp.slice_value(s + 1, kx, ky, tnx, tny) } else { 0.0 };
                                    // Re IFFT(Z (Ka - i Kb)) = Wa * ka + Wb * kb for real even kernels.
                                    acc[idx] += z[idx] * Complex64::new(ka, -kb);
                                }
                            }
                        }
                        s += if pair { 2 } else { 1 };
                    }
                }
                let inv = 1.0 / n as f64;
                accs.into_iter()
                    .map(|mut a| {
                        fft.inverse_t(&mut a, &mut tmp);
                        let mut out = vec![0.0; region];
                        for ry in 0..level.rny {
                            let src = &a[(ry + level.pad) * tnx + level.pad..];
                            let dst = &mut out[ry * level.rnx..(ry + 1) * level.rnx];
                            for (d, c) in dst.iter_mut().zip(src) {
                                *d = c.re * inv;
                            }
                        }
                        out
                    })
                    .collect()
            }
        }
    }

    /// Adds a level's region field onto target-grid values.
    pub(crate) fn accumulate(&self, level: &Level, region: &[f64], out: &mut [f64]) {
        let nx = self.grid.nx();
        if level.e == 0 {
            for (ty, (by, _)) in level.interp_y.iter().enumerate() {
                let row = &region[by * level.rnx..];
                let o = &mut out[ty * nx..(ty + 1) * nx];
                for (tx, (bx, _)) in level.interp_x.iter().enumerate() {
                    o[tx] += row[*bx];
                }
            }
            return;
        }
        let mut rows = vec![0.0; level.rny * nx];
        for ry in 0..level.rny {
            let src = &region[ry * level.rnx..(ry + 1) * level.rnx];
            let dst = &mut rows[ry * nx..(ry + 1) * nx];
            for (tx, (bx, w)) in level.interp_x.iter().enumerate() {
                dst[tx] = w[0] * src[*bx] + w[1] * src[bx + 1] + w[2] * src[bx + 2] + w[3] * src[bx + 3];
            }
        }
        for (ty, (by, w)) in level.interp_y.iter().enumerate() {
            let o = &mut out[ty * nx..(ty + 1) * nx];
            let r0 = &rows[by * nx..];
            let r1 = &rows[(by + 1) * nx..];
            let r2 = &rows[(by + 2) * nx..];
            let r3 = &rows[(by + 3) * nx..];
            for tx in 0..nx {
                o[tx] += w[0] * r0[tx] + w[1] * r1[tx] + w[2] * r2[tx] + w[3] * r3[tx];
            }
        }
    }

    /// Samples all families from one seed.
    pub fn sample_all(&self, seed: u64) -> Vec<FieldSample> {
        self.sample_split(seed, None).0
    }

    /// Like [`Sampler::sample_all`], also returning the partial sums over
    /// octaves below `split` (the field at scales `k..split` from the same noise).
    pub fn sample_split(&self, seed: u64, split: Option<u32>) -> (Vec<FieldSample>, Vec<FieldSample>) {
        let len = self.grid.len();
        let nf = self.families.len();
        let mut outs = vec![vec![0.0; len]; nf];
        let mut partial = vec![vec![0.0; len]; if split.is_some() { nf } else { 0 }];
        let mut partial_done = split.is_none();
        for level in &self.levels {
            if !partial_done && level.j >= split.unwrap() as i32 {
                partial.clone_from(&outs);
                partial_done = true;
            }
            let fields = self.level_fields(level, seed, None);
            for (f, region) in fields.iter().enumerate() {
                self.accumulate(level, region, &mut outs[f]);
            }
        }
        if !partial_done {
            partial.clone_from(&outs);
        }
        let wrap = |vals: Vec<Vec<f64>>, hi: f64| -> Vec<FieldSample> {
            vals.into_iter()
                .zip(&self.families)
                .map(|(values, fam)| FieldSample {
                    grid: self.grid,
                    values,
                    scale_lo: self.k,
                    scale_hi: hi,
                    kind: fam.kind(),
                    seed,
                    ledger: None,
                })
                .collect()
        };
        let hi_split = split.map_or(self.n, |s| (s as f64).clamp(self.k, self.n));
        (wrap(outs, self.n), wrap(partial, hi_split))
    }

    /// Samples the first family.
    pub fn sample(&self, seed: u64) -> FieldSample {
        self.sample_all(seed).swap_remove(0)
    }
}

fn direct_accumulate(out: &mut [f64], noise: &[f64], taps: &[(i32, i32, f64)], level: &Level) {
    let (rnx, rny, tnx, pad) = (level.rnx, level.rny, level.tnx, level.pad as i32);
    for &(dx, dy, w) in taps {
        for ry in 0..rny {
            let sy = (ry as i32 + pad - dy) as usize;
            let sx = (pad - dx) as usize;
            let src = &noise[sy * tnx + sx..sy * tnx + sx + rnx];
            let dst = &mut out[ry * rnx..(ry + 1) * rnx];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += w * s;
            }
        }
    }
}

/// Samples `phi_{k,n}` on `grid` with default options.
pub fn sample_phi(k: f64, n: f64, grid: &GridSpec, seed: u64) -> Result<FieldSample> {
    Ok(Sampler::new(vec![KernelFamily::Heat], k, n, *grid, SamplerOptions::default())?.sample(seed))
}

/// Samples `psi_{0,n}`; with `ledger_k = Some(K)` the white noise of octaves
/// `>= K` is kept per block of side `2^-K` for exact resampling.
pub fn sample_psi(
    n: f64,
    grid: &GridSpec,
    trunc: TruncationParams,
    seed: u64,
    ledger_k: Option<u32>,
) -> Result<FieldSample> {
    if let Some(kk) = ledger_k {
        if kk as f64 > n {
            return Err(FieldError::Domain(format!("ledger block scale K={kk} exceeds n={n}")));
        }
    }
    let opts = SamplerOptions { mode: SliceMode::Independent, ..Default::default() };
    match ledger_k {
        Some(kk) => Ok(LedgerSampler::new(n, kk, *grid, trunc, opts)?.sample(seed)),
        None => Ok(Sampler::new(vec![KernelFamily::Truncated(trunc)], 0.0, n, *grid, opts)?.sample(seed)),
    }
}

/// `phi_{k,n}` and `psi_{k,n}` driven by the same white noise.
pub fn sample_coupled(k: f64, n: f64, grid: &GridSpec, trunc: TruncationParams, seed: u64) -> Result<(FieldSample, FieldSample)> {
    let opts = SamplerOptions { mode: SliceMode::Independent, ..Default::default() };
    let s = Sampler::new(vec![KernelFamily::Heat, KernelFamily::Truncated(trunc)], k, n, *grid, opts)?;
    let mut v = s.sample_all(seed);
    let psi = v.pop().unwrap();
    let phi = v.pop().unwrap();
    Ok((phi, psi))
}
