//! Particle representation of finite Borel measures.

pub mod density;
pub mod distance;
mod io;
pub mod observable;
pub mod particle;
pub mod space;

pub use density::{ball_volume, DensityRule, DensitySpec, Support};
pub use distance::{bl_distance, wasserstein_1d, BlReference, ProbeConfig, ProbeFamily};
pub use observable::TestFunction;
pub use particle::ParticleMeasure;
pub use space::{Axis, MetricSpace, Point};
