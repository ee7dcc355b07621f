//! Approximate conformal invariance of the heat-kernel field.
//!
//! For a conformal `F` with `|F'| >= 1` on `U`, coupling the white noises
//! through `F` splits `phi_delta - phi~_delta o F` into a high-frequency part
//! and two low-frequency parts. This crate evaluates the variance integrals
//! controlling those parts by deterministic quadrature for three built-in map
//! families, and checks the exact dyadic scaling of the field by sampling.

pub mod maps;
pub mod quadrature;
pub mod scaling;
pub mod sweep;

pub use lfpp_field::{FieldError, Result};
pub use maps::{ConformalMapSpec, MapKind};
pub use quadrature::{boundary_term_integral, kernel_gap_integral, third_term_variance, QuadOptions, QuadValue};
pub use scaling::{coupled_scaling_check, scaled_crossing_check, CrossingScaleReport, ScalingConfig, ScalingReport, ScalingRow};
pub use sweep::{conformal_report, delta_sweep, dyadic, lag_pair, lag_sweep, ConformalReport, Term, TermRow, TermSweep};
