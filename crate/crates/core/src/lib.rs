//! Numerical ergodic theory on particle ensembles.
//!
//! Probability measures are weighted point clouds ([`ParticleMeasure`]) that
//! are pushed forward exactly by a [`Semiflow`]. On top of that sit
//! estimators for ergodic, physical, mixing and attracting behaviour
//! ([`classify`]) and the cover / coarse-graining machinery that turns a
//! mixing invariant measure into an attracting one ([`coarse`]).
//!
//! Core types are generic over the scalar: [`Real`] for anything analytic,
//! [`Scalar`] (which also admits exact rationals) for the piecewise-linear
//! maps. The aliases below fix `f64`.

// `!(a < b)` is deliberate: NaN must fail every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod coarse;
pub mod error;
pub mod measure;
pub mod numeric;
pub mod scalar;
pub mod systems;

pub use error::{Error, Result};
pub use measure::{DensitySpec, MetricSpace, ParticleMeasure, Point, ProbeConfig, Support, TestFunction};
pub use scalar::{Real, Scalar};
pub use systems::{BowenContext, Semiflow, SystemSpec, TimeKind};

pub type Point64 = Point<f64>;
pub type ParticleMeasure64 = ParticleMeasure<f64>;
pub type TestFunction64 = TestFunction<f64>;
pub type SystemSpec64 = SystemSpec<f64>;
pub type BowenContext64 = BowenContext<f64>;


/// Exact point for orbit computations of the piecewise-linear maps.
pub type RationalPoint = Point<num_rational::BigRational>;
pub type SeriesRecord64 = classify::SeriesRecord<f64>;
pub type CoverSpec64 = coarse::CoverSpec<f64>;
