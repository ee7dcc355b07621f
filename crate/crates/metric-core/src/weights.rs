use lfpp_field::{FieldError, FieldSample, GridSpec, Rect, Result};

/// Node weights on the sample grid.
#[derive(Debug, Clone)]
pub struct WeightGrid {
    pub grid: GridSpec,
    pub xi: f64,
    pub lambda: f64,
    pub weights: Vec<f64>,
    /// Number of field values clamped to `+-700 / xi`.
    pub clamped: usize,
    /// Largest field value after clamping.
    pub field_max: f64,
}

/// Weights `exp(xi * field) / lambda`. `xi = 0` is allowed and gives a flat metric.
pub fn build_weights(field: &FieldSample, xi: f64, lambda: f64) -> Result<WeightGrid> {
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(FieldError::Domain(format!("xi must be nonnegative and finite, got {xi}")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(FieldError::Domain(format!("lambda must be positive, got {lambda}")));
    }
    let cap = if xi > 0.0 { 700.0 / xi } else { f64::INFINITY };
    let mut clamped = 0;
    let mut field_max = f64::NEG_INFINITY;
    let weights = field
        .values
        .iter()
        .map(|&v| {
            let c = if v.abs() > cap {
                clamped += 1;
                v.clamp(-cap, cap)
            } else {
                v
            };
            field_max = field_max.max(c);
            (xi * c).exp() / lambda
        })
        .collect();
    Ok(WeightGrid { grid: field.grid, xi, lambda, weights, clamped, field_max })
}

impl WeightGrid {
    pub fn nx(&self) -> usize {
        self.grid.nx()
    }

    pub fn ny(&self) -> usize {
        self.grid.ny()
    }

    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[j * self.grid.nx() + i]
    }

    /// Grid index range `[i0, i1] x [j0, j1]` covering `rect`, or an error if it
    /// leaves the grid or has fewer than two nodes per side.
    pub fn index_rect(&self, rect: &Rect) -> Result<(usize, usize, usize, usize)> {
        if !(rect.width() > 0.0 && rect.height() > 0.0) {
            return Err(FieldError::Domain(format!("degenerate rectangle {rect:?}")));
        }
        if !self.grid.rect.contains(rect) {
            return Err(FieldError::Domain(format!("rectangle {rect:?} leaves the grid {:?}", self.grid.rect)));
        }
        let m = self.grid.m as f64;
        let (ox, oy) = self.grid.origin();
        let idx = |v: f64, o: i64| ((v * m).round() as i64 - o) as usize;
        let (i0, i1) = (idx(rect.x0, ox), idx(rect.x1, ox));
        let (j0, j1) = (idx(rect.y0, oy), idx(rect.y1, oy));
        if i1 <= i0 || j1 <= j0 {
            return Err(FieldError::Domain(format!("rectangle {rect:?} spans less than one grid cell")));
        }
        Ok((i0, i1, j0, j1))
    }
}
