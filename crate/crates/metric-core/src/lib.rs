//! LFPP observables on a grid: node weights `exp(xi * field) / lambda`,
//! 8-neighbour edges with trapezoid weights, exact shortest paths.

mod blocks;
mod diameter;
mod dijkstra;
pub mod export;
mod holder;
mod weights;

pub use blocks::{block_center_values, condition_t_ratio, condition_t_ratio_from_values, visited_block_path, visited_blocks};
pub use diameter::{chaining_surrogate, diameter_estimate, DiameterEstimate};
pub use dijkstra::{crossing, crossing_with, distances_from, path_length, point_distance, CrossingResult, Orientation, TieBreak};
pub use holder::{holder_ratios, stratified_pairs, HolderRatios, PointPair};
pub use weights::{build_weights, WeightGrid};

pub use lfpp_field::{FieldError, Rect, Result};
