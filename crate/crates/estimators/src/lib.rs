//! Monte Carlo estimators for crossing lengths of LFPP metrics.
//!
//! Replicas are indexed by derived seeds, computed in parallel and collected
//! in index order, so every estimate is a pure function of its configuration
//! and master seed.

pub mod condition_t;
pub mod efron_stein;
pub mod exponent;
pub mod fkg;
pub mod mc;
pub mod quantile;
pub mod rsw;
pub mod shift;
pub mod stats;
pub mod tails;
pub mod variance;

pub use condition_t::{condition_t_fit, condition_t_norm, ConditionTConfig, ConditionTReport, ConditionTRow};
pub use efron_stein::{efron_stein_decompose, efron_stein_replica, positive_part_sq, EfronSteinConfig, EfronSteinReport, ReplicaTerms};
pub use exponent::{
    exponent_fit, exponent_fit_table, exponent_slope_ci, exponent_target, lambda_apriori, ratio_transfer, weak_mult_check,
    weak_mult_ci, AprioriReport, ExponentFit, TransferReport, WeakMultReport,
};
pub use fkg::{fkg_check, fkg_from_values, FkgConfig, FkgReport};
pub use mc::{crossing_values, mc_crossings, replica_seed, select, FieldModel, McConfig, Observable, SampleSet};
pub use quantile::{order_index, quantile, quantile_table, QuantileRow, QuantileTable};
pub use rsw::{rsw_compare, RswReport, RswRow};
pub use shift::{quantile_shift_check, shifted_values, ShiftReport, ShiftRow};
pub use tails::{tail_curve, tail_curve_on, TailCurve, TailFit, TailPoint, TailSide};
pub use variance::{quantile_variance_link, var_log_crossing, QuantileVarReport, VarReport};

pub use lfpp_field::{FieldError, Result};
