//! Dirichlet Gaussian free field on `D = [0, 1]^2` and its heat-kernel
//! mollification.
//!
//! The field is synthesized in the sine eigenbasis with covariance
//! `2 pi G_D`, so `E h(x) h(y) = -log |x - y| + O(1)` inside `D`. Mollifying by
//! `p_{t/2}` acts on the odd extension of `h`, which damps mode `(j, k)` by
//! `exp(-t lambda_jk / 4)`. The killed-kernel module evaluates the gap between
//! `p_{t/2} * p^D_{s/2}` and `p_{(t+s)/2}` on `U = [1/4, 3/4]^2`, and the
//! comparison module sets crossing laws of the mollified GFF against those of
//! `phi_{sqrt(delta)}`.

pub mod compare;
pub mod gff;
pub mod killed;

pub use compare::{compare_crossing_laws, inner_domain, CompareReport, CompareRow, DeltaComparison, Source, QUANTILES};
pub use gff::{eigenvalue, lattice_sine, mollify, sample_gff, series_covariance, GffSample};
pub use killed::{gap_decay_fit, killed_kernel, killed_kernel_1d, killed_kernel_gap, smoothed_killed, GapFit, GapRow, S_MIN};
pub use lfpp_field::{FieldError, Result};
