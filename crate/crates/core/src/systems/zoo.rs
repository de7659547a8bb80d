//! Built-in systems, selected by id.
//!
//! The piecewise-linear maps are generic over [`Scalar`] and evolve exactly
//! over the rationals; floating-point orbits of expanding maps lose one bit
//! per step, so periodic-orbit checks should use `build_exact`.

use std::sync::Arc;

use super::attractor::{BoxAttractor, UnitCircleAttractor};
use super::counterexample::{Counterexample, LinearTorusFlow};
use super::{check_time, iterate, Semiflow, SystemSpec, TimeKind};
use crate::error::{Error, Result};
use crate::measure::{Axis, DensitySpec, MetricSpace, Point, Support};
use crate::scalar::{Real, Scalar};

pub const ZOO_IDS: &[&str] =
    &["doubling", "cat", "rotation", "doubling_contract", "counterexample", "identity", "planar_rotation"];

/// Tunable parameters of the zoo.
#[derive(Debug, Clone, PartialEq)]
pub struct ZooParams {
    /// Fiber coordinate used by counterexample experiments.
    pub y0: f64,
    /// Frequency vector of the linear base flow of the counterexample.
    pub base_omega: Vec<f64>,
    /// Number of base points used to bound the base vector field.
    pub field_grid: usize,
    /// Speed of the circle rotation flow.
    pub rotation_speed: f64,
    /// Dimension of the torus carrying the identity system.
    pub identity_dim: usize,
}

impl Default for ZooParams {
    fn default() -> Self {
        ZooParams {
            y0: 0.2,
            base_omega: vec![1.0, std::f64::consts::SQRT_2],
            field_grid: 10_000,
            rotation_speed: 1.0,
            identity_dim: 1,
        }
    }
}

pub fn annulus() -> MetricSpace {
    MetricSpace::new("annulus", vec![Axis::Periodic, Axis::Segment { lo: 0.0, hi: 2.0 }])
}

fn torus_or_circle(dim: usize) -> MetricSpace {
    if dim == 1 {
        MetricSpace::circle()
    } else {
        MetricSpace::torus(dim)
    }
}

/// `x -> 2x mod 1` on the circle.
#[derive(Debug, Clone)]
pub struct Doubling {
    space: MetricSpace,
}

impl Default for Doubling {
    fn default() -> Self {
        Doubling { space: MetricSpace::circle() }
    }
}

impl<S: Scalar> Semiflow<S> for Doubling {
    fn id(&self) -> &str {
        "doubling"
    }
    fn space(&self) -> &MetricSpace {
        &self.space
    }
    fn time_kind(&self) -> TimeKind {
        TimeKind::Discrete
    }
    fn evolve(&self, t: &S, x: &Point<S>) -> Result<Point<S>> {
        let n = check_time(TimeKind::Discrete, t)?;
        let two = S::one() + S::one();
        Ok(iterate(|p| Point(vec![(two.clone() * p[0].clone()).wrap_unit()]), n, x))
    }
}

/// Arnold cat map `[[2,1],[1,1]]` on the 2-torus.
#[derive(Debug, Clone)]
pub struct CatMap {
    space: MetricSpace,
}

impl Default for CatMap {
    fn default() -> Self {
        CatMap { space: MetricSpace::torus(2) }
    }
}

impl<S: Scalar> Semiflow<S> for CatMap {
    fn id(&self) -> &str {
        "cat"
    }
    fn space(&self) -> &MetricSpace {
        &self.space
    }
    fn time_kind(&self) -> TimeKind {
        TimeKind::Discrete
    }
    fn evolve(&self, t: &S, x: &Point<S>) -> Result<Point<S>> {
        let n = check_time(TimeKind::Discrete, t)?;
        Ok(iterate(
            |p| {
                let (a, b) = (p[0].clone(), p[1].clone());
                Point(vec![(a.clone() + a.clone() + b.clone()).wrap_unit(), (a + b).wrap_unit()])
            },
            n,
            x,
        ))
    }
}

/// `(theta, r) -> (2 theta mod 1, 1 + (r - 1)/2)` on the annulus; attractor `r = 1`.
#[derive(Debug, Clone)]
pub struct DoublingContract {
    space: MetricSpace,
}

impl Default for DoublingContract {
    fn default() -> Self {
        DoublingContract { space: annulus() }
    }
}

impl<S: Scalar> Semiflow<S> for DoublingContract {
    fn id(&self) -> &str {
        "doubling_contract"
    }
    fn space(&self) -> &MetricSpace {
        &self.space
    }
    fn time_kind(&self) -> TimeKind {
        TimeKind::Discrete
    }
    fn evolve(&self, t: &S, x: &Point<S>) -> Result<Point<S>> {
        let n = check_time(TimeKind::Discrete, t)?;
        let two = S::one() + S::one();
        Ok(iterate(
            |p| {
                Point(vec![
                    (two.clone() * p[0].clone()).wrap_unit(),
                    S::one() + (p[1].clone() - S::one()) / two.clone(),
                ])
            },
            n,
            x,
        ))
    }
}

/// Constant-speed flow `theta -> theta + speed * t` on the circle.
#[derive(Debug, Clone)]
pub struct Rotation<S> {
    space: MetricSpace,
    speed: S,
}

impl<S: Scalar> Rotation<S> {
    pub fn new(speed: S) -> Self {
        Rotation { space: MetricSpace::circle(), speed }
    }
}

impl<S: Scalar> Semiflow<S> for Rotation<S> {
    fn id(&self) -> &str {
        "rotation"
    }
    fn space(&self) -> &MetricSpace {
        &self.space
    }
    fn time_kind(&self) -> TimeKind {
        TimeKind::Continuous
    }
    fn evolve(&self, t: &S, x: &Point<S>) -> Result<Point<S>> {
        check_time(TimeKind::Continuous, t)?;
        if t.is_zero() {
            return Ok(x.clone());
        }
        Ok(Point(vec![(x[0].clone() + self.speed.clone() * t.clone()).wrap_unit()]))
    }
    fn vector_field(&self, _x: &Point<S>) -> Option<Vec<S>> {
        Some(vec![self.speed.clone()])
    }
}

/// `f^t = id`.
#[derive(Debug, Clone)]
pub struct Identity {
    space: MetricSpace,
}

impl Identity {
    pub fn new(space: MetricSpace) -> Self {
        Identity { space }
    }
}

impl<S: Scalar> Semiflow<S> for Identity {
    fn id(&self) -> &str {
        "identity"
    }
    fn space(&self) -> &MetricSpace {
        &self.space
    }
    fn time_kind(&self) -> TimeKind {
        TimeKind::Continuous
    }
    fn evolve(&self, t: &S, x: &Point<S>) -> Result<Point<S>> {
        check_time(TimeKind::Continuous, t)?;
        Ok(x.clone())
    }
    fn vector_field(&self, x: &Point<S>) -> Option<Vec<S>> {
        Some(vec![S::zero(); x.dim()])
    }
}

/// Harmonic rotation `x' = -y, y' = x` in the plane. Every circle about the
/// origin is invariant, so the unit circle is Lyapunov stable but attracts
/// nothing.
#[derive(Debug, Clone)]
pub struct PlanarRotation {
    space: MetricSpace,
}

impl Default for PlanarRotation {
    fn default() -> Self {
        PlanarRotation { space: MetricSpace::euclidean(2) }
    }
}

impl<R: Real> Semiflow<R> for PlanarRotation {
    fn id(&self) -> &str {
        "planar_rotation"
    }
    fn space(&self) -> &MetricSpace {
        &self.space
    }
    fn time_kind(&self) -> TimeKind {
        TimeKind::Continuous
    }
    fn evolve(&self, t: &R, x: &Point<R>) -> Result<Point<R>> {
        check_time(TimeKind::Continuous, t)?;
        if t.is_zero() {
            return Ok(x.clone());
        }
        let (s, c) = t.sin_cos();
        Ok(Point(vec![c * x[0] - s * x[1], s * x[0] + c * x[1]]))
    }
    fn vector_field(&self, x: &Point<R>) -> Option<Vec<R>> {
        Some(vec![-x[1], x[0]])
    }
}

/// Exactly evolvable systems, for any scalar including rationals.
pub fn build_exact<S: Scalar>(id: &str) -> Result<Arc<dyn Semiflow<S>>> {
    Ok(match id {
        "doubling" => Arc::new(Doubling::default()),
        "cat" => Arc::new(CatMap::default()),
        "doubling_contract" => Arc::new(DoublingContract::default()),
        "rotation" => Arc::new(Rotation::new(S::one())),
        "identity" => Arc::new(Identity::new(MetricSpace::circle())),
        other => return Err(Error::UnknownSystem(other.into())),
    })
}

/// A zoo member with its declared attractor and candidate measure.
pub fn build_system<R: Real>(id: &str, params: &ZooParams) -> Result<SystemSpec<R>> {
    let whole = |dim: usize| {
        let lo = vec![0.0; dim];
        let hi = vec![1.0; dim];
        Arc::new(BoxAttractor::new(torus_or_circle(dim), lo, hi))
    };
    Ok(match id {
        "doubling" => SystemSpec::new(Arc::new(Doubling::default())).with_attractor(whole(1)).with_speed_bound(R::one()),
        "cat" => SystemSpec::new(Arc::new(CatMap::default())).with_attractor(whole(2)),
        "rotation" => {
            let speed = R::c(params.rotation_speed);
            SystemSpec::new(Arc::new(Rotation::new(speed))).with_attractor(whole(1)).with_speed_bound(speed.abs())
        }
        "doubling_contract" => SystemSpec::new(Arc::new(DoublingContract::default()))
            .with_attractor(Arc::new(BoxAttractor::new(annulus(), vec![0.0, 1.0], vec![1.0, 1.0]))),
        "identity" => {
            let dim = params.identity_dim.max(1);
            SystemSpec::new(Arc::new(Identity::new(torus_or_circle(dim)))).with_attractor(whole(dim)).with_speed_bound(R::zero())
        }
        "planar_rotation" => SystemSpec::new(Arc::new(PlanarRotation::default()))
            .with_attractor(Arc::new(UnitCircleAttractor))
            .with_speed_bound(R::c(2.0)),
        "counterexample" => {
            let base = LinearTorusFlow::new(params.base_omega.iter().map(|w| R::c(*w)).collect());
            let cx = Counterexample::new(Arc::new(base), params.field_grid)?;
            let dim = params.base_omega.len();
            let mut lo = vec![0.0; dim + 1];
            let mut hi = vec![1.0; dim + 1];
            lo[dim] = 0.0;
            hi[dim] = 0.0;
            let speed = cx.field_bound() * R::c(params.y0.abs().max(0.5)) + R::one();
            let space = cx.space().clone();
            SystemSpec::new(Arc::new(cx)).with_attractor(Arc::new(BoxAttractor::new(space, lo, hi))).with_speed_bound(speed)
        }
        other => return Err(Error::UnknownSystem(other.into())),
    })
}

/// Default neighbourhood `U` of the attractor carrying initial densities.
pub fn default_neighbourhood(id: &str, params: &ZooParams) -> Result<DensitySpec> {
    Ok(match id {
        "doubling" | "rotation" => DensitySpec::uniform(MetricSpace::circle(), Support::boxed(vec![0.0], vec![0.1])),
        "cat" => DensitySpec::uniform(MetricSpace::torus(2), Support::boxed(vec![0.0, 0.0], vec![0.1, 0.1])),
        "doubling_contract" => DensitySpec::uniform(annulus(), Support::boxed(vec![0.0, 0.5], vec![1.0, 1.5])),
        "identity" => {
            let dim = params.identity_dim.max(1);
            DensitySpec::uniform(torus_or_circle(dim), Support::boxed(vec![0.0; dim], vec![0.1; dim]))
        }
        "planar_rotation" => DensitySpec::uniform(MetricSpace::euclidean(2), Support::ball(vec![1.2, 0.0], 0.1)),
        "counterexample" => {
            let dim = params.base_omega.len();
            let mut lo = vec![0.0; dim + 1];
            let mut hi = vec![1.0; dim + 1];
            lo[dim] = -0.5;
            hi[dim] = 0.5;
            let mut axes = vec![Axis::Periodic; dim];
            axes.push(Axis::Line);
            DensitySpec::uniform(MetricSpace::new(format!("torus{dim}xR"), axes), Support::boxed(lo, hi))
        }
        other => return Err(Error::UnknownSystem(other.into())),
    })
}
