//! Two-dimensional complex FFTs on row-major arrays.
//!
//! The forward transform leaves the spectrum transposed (index `[kx][ky]`) so
//! that a filter-and-invert round trip needs only two transposes.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub(crate) struct Fft2 {
    pub nx: usize,
    pub ny: usize,
    row_f: Arc<dyn Fft<f64>>,
    row_i: Arc<dyn Fft<f64>>,
    col_f: Arc<dyn Fft<f64>>,
    col_i: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(nx: usize, ny: usize) -> Self {
        let mut p = FftPlanner::new();
        Fft2 {
            nx,
            ny,
            row_f: p.plan_fft_forward(nx),
            row_i: p.plan_fft_inverse(nx),
            col_f: p.plan_fft_forward(ny),
            col_i: p.plan_fft_inverse(ny),
        }
    }

    /// Row-major `[y][x]` in, transposed spectrum `[kx][ky]` out (via `tmp`).
    pub fn forward_t(&self, data: &mut Vec<Complex64>, tmp: &mut Vec<Complex64>) {
        self.row_f.process(data);
        transpose(data, tmp, self.nx, self.ny);
        self.col_f.process(tmp);
        std::mem::swap(data, tmp);
    }

    /// Transposed spectrum in, unnormalized row-major field out.
    pub fn inverse_t(&self, data: &mut Vec<Complex64>, tmp: &mut Vec<Complex64>) {
        self.col_i.process(data);
        transpose(data, tmp, self.ny, self.nx);
        self.row_i.process(tmp);
        std::mem::swap(data, tmp);
    }
}

/// Transposes a `rows x cols` row-major array (`cols` contiguous) into `dst`.
pub(crate) fn transpose(src: &[Complex64], dst: &mut Vec<Complex64>, cols: usize, rows: usize) {
    dst.resize(src.len(), Complex64::new(0.0, 0.0));
    const B: usize = 32;
    for rb in (0..rows).step_by(B) {
        for cb in (0..cols).step_by(B) {
            for r in rb..(rb + B).min(rows) {
                let s = &src[r * cols..];
                for c in cb..(cb + B).min(cols) {
                    dst[c * rows + r] = s[c];
                }
            }
        }
    }
}

/// Smallest integer `>= n` whose prime factors are in {2, 3, 5, 7}.
pub(crate) fn good_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5, 7] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}
