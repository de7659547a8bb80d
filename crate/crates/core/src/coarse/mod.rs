//! Bowen-metric covers, coarse-graining of measures and Bowen-ball ratios.

pub mod cover;
pub mod grain;
pub mod ratio;

pub use cover::{greedy_bisep, read_centers_csv, CoverReport, CoverSpec, CELL_MULTIPLIER};
pub use grain::{approx_error_check, coarse_grain, coarse_grain_detailed, pushed_gap, CoarseGrainReport};
pub use ratio::{bowen_ratio, cehyp_scan, read_cehyp_csv, write_cehyp_csv, CehypRow, Draws, RatioEstimate, UniformBoxSampler, MIN_MC};
