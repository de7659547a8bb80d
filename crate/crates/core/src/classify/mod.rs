//! Estimators for ergodic, physical, mixing and attracting behaviour.
//!
//! Everything returns curves ([`SeriesRecord`]); convergence is judged by a
//! threshold rule on the tail of a curve, never asserted as a hard fact.

pub mod birkhoff;
pub mod concentration;
pub mod correlation;
pub mod orbit_track;
pub mod series;

pub use birkhoff::{
    along_grid, attracting_test, attracting_test_from, basin_test, basin_test_exact, birkhoff_measure, birkhoff_measure_exact,
    generic_rational_point, BirkhoffOptions, GENERIC_DENOMINATOR,
};
pub use concentration::{concentration_bound, concentration_bound_raw, concentration_profile, DEFAULT_QUADRATURE_N};
pub use correlation::{classical_correlation, classical_correlation_detailed, operational_correlation, CorrelationSeries};
pub use orbit_track::{orbit_track_search, tracking_grid, OrbitTrackOptions, OrbitTrackResult};
pub use series::{SeriesRecord, Verdict};

/// Default convergence threshold of [`SeriesRecord::verdict`].
pub const DEFAULT_THETA: f64 = 0.05;

/// Geometric grid `1, 2, 4, ..` up to and including `t_max` (appended if not a power of 2).
pub fn geometric_grid(t_max: f64) -> Vec<f64> {
    let mut g = Vec::new();
    let mut t = 1.0;
    while t < t_max {
        g.push(t);
        t *= 2.0;
    }
    g.push(t_max);
    g
}
