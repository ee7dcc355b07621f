//! Target grids: an axis-aligned rectangle sampled at spacing `1/m`.

use serde::{Deserialize, Serialize};

use crate::kernel::gaussian_padding;
use crate::{FieldError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    pub fn unit() -> Self {
        Rect::new(0.0, 0.0, 1.0, 1.0)
    }

    /// `[0, a] x [0, b]`.
    pub fn sized(a: f64, b: f64) -> Self {
        Rect::new(0.0, 0.0, a, b)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn contains(&self, other: &Rect) -> bool {
        let eps = 1e-12;
        other.x0 >= self.x0 - eps && other.y0 >= self.y0 - eps && other.x1 <= self.x1 + eps && other.y1 <= self.y1 + eps
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }
}

/// Grid geometry. Nodes sit at absolute positions `i / m` for integers `i`,
/// so grids with the same `m` share nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub m: u32,
    pub rect: Rect,
    pub padding: f64,
}

impl GridSpec {
    /// Grid with padding sufficient for kernels up to time 1.
    pub fn new(m: u32, rect: Rect) -> Result<Self> {
        Self::with_padding(m, rect, gaussian_padding(1.0))
    }

    pub fn with_padding(m: u32, rect: Rect, padding: f64) -> Result<Self> {
        if m < 2 {
            return Err(FieldError::Config(format!("resolution m must be >= 2, got {m}")));
        }
        if !(rect.width() > 0.0 && rect.height() > 0.0) {
            return Err(FieldError::Domain(format!("degenerate rectangle {rect:?}")));
        }
        let mf = m as f64;
        for v in [rect.x0, rect.y0, rect.x1, rect.y1] {
            if ((v * mf).round() - v * mf).abs() > 1e-9 {
                return Err(FieldError::Config(format!("rectangle corner {v} is not a multiple of 1/{m}")));
            }
        }
        if !(padding >= 0.0) {
            return Err(FieldError::Config(format!("padding must be nonnegative, got {padding}")));
        }
        Ok(GridSpec { m, rect, padding })
    }

    /// Smallest power-of-two resolution resolving scale `n` with oversampling 4.
    pub fn for_scale(n: f64, rect: Rect) -> Result<Self> {
        let e = (n.ceil().max(0.0) as u32) + 2;
        Self::new(1u32 << e, rect)
    }

    pub fn h(&self) -> f64 {
        1.0 / self.m as f64
    }

    pub fn nx(&self) -> usize {
        (self.rect.width() * self.m as f64).round() as usize + 1
    }

    pub fn ny(&self) -> usize {
        (self.rect.height() * self.m as f64).round() as usize + 1
    }

    pub fn len(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Absolute lattice index of the lower-left node.
    pub fn origin(&self) -> (i64, i64) {
        let mf = self.m as f64;
        ((self.rect.x0 * mf).round() as i64, (self.rect.y0 * mf).round() as i64)
    }

    pub fn position(&self, i: usize, j: usize) -> (f64, f64) {
        let (ox, oy) = self.origin();
        let h = self.h();
        ((ox + i as i64) as f64 * h, (oy + j as i64) as f64 * h)
    }

    /// Nearest node to a point, clamped into the grid.
    pub fn nearest(&self, x: f64, y: f64) -> (usize, usize) {
        let (ox, oy) = self.origin();
        let mf = self.m as f64;
        let i = ((x * mf).round() as i64 - ox).clamp(0, self.nx() as i64 - 1) as usize;
        let j = ((y * mf).round() as i64 - oy).clamp(0, self.ny() as i64 - 1) as usize;
        (i, j)
    }

    /// Largest scale `n` this grid resolves with oversampling factor 4.
    pub fn max_scale(&self) -> f64 {
        (self.m as f64).log2() - 2.0
    }

    pub fn same_nodes(&self, other: &GridSpec) -> bool {
        self.m == other.m && self.origin() == other.origin() && self.nx() == other.nx() && self.ny() == other.ny()
    }
}
