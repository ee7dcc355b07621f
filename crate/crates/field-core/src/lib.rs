//! Gaussian log-correlated fields built from the heat kernel.
//!
//! The field at scales between `2^-n` and `2^-k` is
//!
//! ```text
//! phi_{k,n}(x) = int_{2^-2n}^{2^-2k} int_R2 sqrt(pi) p_{t/2}(x - y) W(dy, dt)
//! ```
//!
//! with `W` a space-time white noise and `p_t` the planar heat kernel, so the
//! pointwise variance is `(n - k) log 2`. The truncated field `psi` multiplies
//! each kernel by a compactly supported bump of radius `2 sigma_t`, which gives
//! it a finite range of dependence.
//!
//! Sampling discretizes time into log-uniform slices per octave and space into
//! white-noise cells, and convolves on a padded torus with FFTs. Coarse octaves
//! are synthesized on coarser lattices and interpolated onto the target grid.

pub mod dump;
mod error;
mod fft;
pub mod grid;
pub mod kernel;
pub mod ledger;
pub mod quad;
pub mod sampler;
pub mod seed;
pub mod stats;

pub use error::FieldError;
pub use grid::{GridSpec, Rect};
pub use kernel::{bump, cov_phi, heat_kernel, TruncationParams};
pub use ledger::{resample_component, replace_component, Component, LedgerSampler, NoiseLedger, NoiseSlab};
pub use sampler::{
    sample_coupled, sample_phi, sample_psi, FieldKind, FieldSample, KernelFamily, Sampler,
    SamplerOptions, SliceMode,
};
pub use seed::derive_seed;
pub use stats::{field_stats, sup_difference, FieldStats};

pub type Result<T> = std::result::Result<T, FieldError>;
