//! Built-in conformal maps with known first and second derivatives.

use lfpp_field::{FieldError, Rect, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Map families. Points of the plane are complex numbers `x + iy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MapKind {
    /// `z -> s z + b`.
    Affine { scale: [f64; 2], shift: [f64; 2] },
    /// `z -> z + c z^2`.
    Quadratic { c: f64 },
    /// `z -> z^2`.
    Square,
}

impl MapKind {
    pub fn f(&self, z: Complex64) -> Complex64 {
        match *self {
            MapKind::Affine { scale, shift } => c(scale) * z + c(shift),
            MapKind::Quadratic { c } => z + c * z * z,
            MapKind::Square => z * z,
        }
    }

    pub fn df(&self, z: Complex64) -> Complex64 {
        match *self {
            MapKind::Affine { scale, .. } => c(scale),
            MapKind::Quadratic { c } => 1.0 + 2.0 * c * z,
            MapKind::Square => 2.0 * z,
        }
    }

    pub fn d2f(&self, _z: Complex64) -> Complex64 {
        match *self {
            MapKind::Affine { .. } => Complex64::new(0.0, 0.0),
            MapKind::Quadratic { c } => Complex64::new(2.0 * c, 0.0),
            MapKind::Square => Complex64::new(2.0, 0.0),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            MapKind::Affine { .. } => "affine",
            MapKind::Quadratic { .. } => "quadratic",
            MapKind::Square => "square",
        }
    }
}

fn c(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

/// A map on a rectangular domain `U` with its derivative bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConformalMapSpec {
    pub kind: MapKind,
    pub domain: Rect,
    /// `sup_U |F'|`.
    pub d1_sup: f64,
    /// `inf_U |F'|`, at least 1.
    pub d1_inf: f64,
    /// `sup_U |F''|`.
    pub d2_sup: f64,
}

const BOUND_MESH: usize = 256;

impl ConformalMapSpec {
    /// Computes the derivative bounds on the closed domain and checks
    /// `|F'| >= 1` there (which also keeps `U` away from critical points).
    pub fn new(kind: MapKind, domain: Rect) -> Result<Self> {
        if !(domain.width() > 0.0 && domain.height() > 0.0) {
            return Err(FieldError::Domain(format!("degenerate map domain {domain:?}")));
        }
        let (mut sup1, mut inf1, mut sup2) = (0.0f64, f64::INFINITY, 0.0f64);
        for i in 0..=BOUND_MESH {
            for j in 0..=BOUND_MESH {
                let z = Complex64::new(
                    domain.x0 + domain.width() * i as f64 / BOUND_MESH as f64,
                    domain.y0 + domain.height() * j as f64 / BOUND_MESH as f64,
                );
                let d = kind.df(z).norm();
                sup1 = sup1.max(d);
                inf1 = inf1.min(d);
                sup2 = sup2.max(kind.d2f(z).norm());
            }
        }
        if inf1 < 1.0 - 1e-12 {
            return Err(FieldError::Domain(format!("{} map has |F'| = {inf1} < 1 on {domain:?}", kind.id())));
        }
        Ok(ConformalMapSpec { kind, domain, d1_sup: sup1, d1_inf: inf1, d2_sup: sup2 })
    }

    /// `z -> s z + b` on `[0.5, 1.5] x [-0.5, 0.5]`.
    pub fn affine(scale: Complex64, shift: Complex64) -> Result<Self> {
        Self::new(MapKind::Affine { scale: [scale.re, scale.im], shift: [shift.re, shift.im] }, default_domain())
    }

    /// `z -> z + c z^2` on `[0.5, 1.5] x [-0.5, 0.5]`; `|F'| >= 1 + c` there for `c >= 0`.
    pub fn quadratic(c: f64) -> Result<Self> {
        Self::new(MapKind::Quadratic { c }, default_domain())
    }

    /// `z -> z^2` on `[1, 2] x [-0.5, 0.5]`, where `|F'| >= 2`.
    pub fn square() -> Result<Self> {
        Self::new(MapKind::Square, Rect::new(1.0, -0.5, 2.0, 0.5))
    }

    pub fn id(&self) -> &'static str {
        self.kind.id()
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.domain.x0 + self.domain.x1), 0.5 * (self.domain.y0 + self.domain.y1))
    }

    /// `sup |F'| / inf |F'|`: `|w(x, y)| >= |x - y| / distortion` on convex `U`.
    pub fn distortion(&self) -> f64 {
        self.d1_sup / self.d1_inf
    }

    /// Distance from `z` to the boundary of `U` (negative outside).
    pub fn margin(&self, z: Complex64) -> f64 {
        let d = &self.domain;
        (z.re - d.x0).min(d.x1 - z.re).min(z.im - d.y0).min(d.y1 - z.im)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.margin(z) >= 0.0
    }

    /// `(F(x) - F(y)) / F'(y)`.
    #[inline]
    pub fn w(&self, x: Complex64, y: Complex64) -> Complex64 {
        (self.kind.f(x) - self.kind.f(y)) / self.kind.df(y)
    }

    /// Radius of the ball `B(x, eps)` on which
    /// `|a (x - y) + (1 - a) w(x, y)| >= |x - y| / 2` for all `a in (0, 1)`.
    ///
    /// Taylor gives `|w - (x - y)| <= |F''| |x - y|^2 / (2 |F'(y)|) <= |F''| |x - y|^2 / 2`,
    /// so `eps = 1 / sup |F''|` suffices; it is capped by the distance to the boundary.
    pub fn eps_case_a(&self, x: Complex64) -> f64 {
        let m = self.margin(x).max(0.0);
        if self.d2_sup > 0.0 {
            (1.0 / self.d2_sup).min(m)
        } else {
            m
        }
    }
}

fn default_domain() -> Rect {
    Rect::new(0.5, -0.5, 1.5, 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_bounds_quadratic() {
        let m = ConformalMapSpec::quadratic(0.25).unwrap();
        assert!((m.d1_inf - 1.25).abs() < 1e-12);
        assert!((m.d1_sup - Complex64::new(1.75, 0.25).norm()).abs() < 1e-12);
        assert_eq!(m.d2_sup, 0.5);
        assert_eq!(m.eps_case_a(m.center()), 0.5);
    }

    #[test]
    fn contracting_map_rejected() {
        assert!(ConformalMapSpec::affine(Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0)).is_err());
        assert!(ConformalMapSpec::new(MapKind::Square, Rect::new(0.0, 0.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn affine_w_is_identity() {
        let m = ConformalMapSpec::affine(Complex64::new(2.0, 1.0), Complex64::new(-3.0, 0.5)).unwrap();
        let (x, y) = (Complex64::new(0.7, 0.1), Complex64::new(1.2, -0.3));
        assert!((m.w(x, y) - (x - y)).norm() < 1e-15);
    }
}
