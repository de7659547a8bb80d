use std::fmt;
use std::sync::Arc;

use super::space::{MetricSpace, Point};
use crate::scalar::Real;

type EvalFn<R> = dyn Fn(&Point<R>) -> R + Send + Sync;

/// Bounded Lipschitz observable with declared sup-bound and Lipschitz constant.
#[derive(Clone)]
pub struct TestFunction<R> {
    f: Arc<EvalFn<R>>,
    sup_bound: R,
    lipschitz: R,
}

impl<R: Real> TestFunction<R> {
    pub fn new<F>(f: F, sup_bound: R, lipschitz: R) -> Self
    where
        F: Fn(&Point<R>) -> R + Send + Sync + 'static,
    {
        TestFunction { f: Arc::new(f), sup_bound, lipschitz }
    }

    pub fn constant(c: R) -> Self {
        Self::new(move |_| c, c.abs(), R::zero())
    }

    /// `amplitude * cos(2 pi k x_axis)`.
    pub fn cosine(axis: usize, k: R, amplitude: R) -> Self {
        let two_pi = R::TAU();
        Self::new(
            move |p| amplitude * (two_pi * k * p[axis]).cos(),
            amplitude.abs(),
            (amplitude * two_pi * k).abs(),
        )
    }

    /// Tent `max(0, height - slope * d(x, center))` in the metric of `space`.
    pub fn cone(space: MetricSpace, center: Point<R>, height: R, slope: R) -> Self {
        Self::new(
            move |p| (height - slope * space.distance(p, &center)).max(R::zero()),
            height.abs(),
            slope.abs(),
        )
    }

    /// Coordinate projection; callers state the bound for the region they use.
    pub fn coordinate(axis: usize, sup_bound: R) -> Self {
        Self::new(move |p| p[axis], sup_bound, R::one())
    }

    pub fn eval(&self, p: &Point<R>) -> R {
        (self.f)(p)
    }

    pub fn sup_bound(&self) -> R {
        self.sup_bound
    }

    pub fn lipschitz(&self) -> R {
        self.lipschitz
    }

    /// `g o map`, with bounds left to the caller.
    pub fn compose<F>(&self, map: F, lipschitz: R) -> Self
    where
        F: Fn(&Point<R>) -> Point<R> + Send + Sync + 'static,
    {
        let f = self.f.clone();
        Self::new(move |p| f(&map(p)), self.sup_bound, lipschitz)
    }

    pub fn product(&self, other: &TestFunction<R>) -> Self {
        let (f, g) = (self.f.clone(), other.f.clone());
        let lip = self.sup_bound * other.lipschitz + other.sup_bound * self.lipschitz;
        Self::new(move |p| f(p) * g(p), self.sup_bound * other.sup_bound, lip)
    }
}

impl<R: fmt::Debug> fmt::Debug for TestFunction<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("sup_bound", &self.sup_bound)
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}
