//! Semiflows, Bowen metrics and the built-in system zoo.

pub mod attractor;
pub mod bowen;
pub mod counterexample;
pub mod integrator;
pub mod zoo;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measure::{MetricSpace, Point};
use crate::scalar::{Real, Scalar};

pub use attractor::{Attractor, BoxAttractor, UnitCircleAttractor};
pub use bowen::BowenContext;
pub use counterexample::{
    b2, b2_prime, f_eval, f_inv, f_prime, f_second, BaseFlow, Counterexample, CounterexampleParams, LinearTorusFlow,
};
pub use integrator::{integrate_flow, integrate_trajectory};
pub use zoo::{build_exact, build_system, default_neighbourhood, ZooParams, ZOO_IDS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeKind {
    Discrete,
    Continuous,
}

/// A semiflow `(f^t)_{t >= 0}` on a metric space.
///
/// Discrete-time systems accept only nonnegative integral times.
pub trait Semiflow<S: Scalar>: Send + Sync {
    fn id(&self) -> &str;

    fn space(&self) -> &MetricSpace;

    fn time_kind(&self) -> TimeKind;

    /// `f^t x`.
    fn evolve(&self, t: &S, x: &Point<S>) -> Result<Point<S>>;

    /// Generating vector field, if the system is an ODE flow.
    fn vector_field(&self, _x: &Point<S>) -> Option<Vec<S>> {
        None
    }

    /// Orbit sampled at nondecreasing `times`, evolved incrementally.
    fn trajectory(&self, x: &Point<S>, times: &[S]) -> Result<Vec<Point<S>>> {
        let mut out: Vec<Point<S>> = Vec::with_capacity(times.len());
        let mut prev_t = S::zero();
        let mut cur = x.clone();
        for t in times {
            let dt = t.clone() - prev_t;
            cur = self.evolve(&dt, &cur)?;
            out.push(cur.clone());
            prev_t = t.clone();
        }
        Ok(out)
    }
}

/// Validate an evolution time; for discrete systems return the step count.
pub fn check_time<S: Scalar>(kind: TimeKind, t: &S) -> Result<u64> {
    if *t < S::zero() {
        return Err(Error::NegativeTime(t.to_f64().unwrap_or(f64::NAN)));
    }
    match kind {
        TimeKind::Discrete => {
            if !t.is_integral() {
                return Err(Error::NonIntegralTime(t.to_f64().unwrap_or(f64::NAN)));
            }
            t.to_u64().ok_or_else(|| Error::DomainError(format!("time {t} too large")))
        }
        TimeKind::Continuous => Ok(0),
    }
}

/// `step` applied `n` times.
pub fn iterate<S: Scalar, F: Fn(&Point<S>) -> Point<S>>(step: F, n: u64, x: &Point<S>) -> Point<S> {
    let mut cur = x.clone();
    for _ in 0..n {
        cur = step(&cur);
    }
    cur
}

/// A semiflow together with its declared attractor and candidate measure.
#[derive(Clone)]
pub struct SystemSpec<R: Real> {
    flow: Arc<dyn Semiflow<R>>,
    attractor: Option<Arc<dyn Attractor<R>>>,
    speed_bound: R,
}

impl<R: Real> SystemSpec<R> {
    pub fn new(flow: Arc<dyn Semiflow<R>>) -> Self {
        SystemSpec { flow, attractor: None, speed_bound: R::one() }
    }

    pub fn with_attractor(mut self, a: Arc<dyn Attractor<R>>) -> Self {
        self.attractor = Some(a);
        self
    }

    /// Bound on orbit speed, used to space continuous Bowen grids.
    pub fn with_speed_bound(mut self, l: R) -> Self {
        self.speed_bound = l;
        self
    }

    pub fn id(&self) -> &str {
        self.flow.id()
    }

    pub fn space(&self) -> &MetricSpace {
        self.flow.space()
    }

    pub fn time_kind(&self) -> TimeKind {
        self.flow.time_kind()
    }

    pub fn flow(&self) -> &Arc<dyn Semiflow<R>> {
        &self.flow
    }

    pub fn attractor(&self) -> Option<&Arc<dyn Attractor<R>>> {
        self.attractor.as_ref()
    }

    pub fn speed_bound(&self) -> R {
        self.speed_bound
    }

    pub fn evolve(&self, t: R, x: &Point<R>) -> Result<Point<R>> {
        self.flow.evolve(&t, x)
    }

    pub fn trajectory(&self, x: &Point<R>, times: &[R]) -> Result<Vec<Point<R>>> {
        self.flow.trajectory(x, times)
    }

    pub fn vector_field(&self, x: &Point<R>) -> Option<Vec<R>> {
        self.flow.vector_field(x)
    }

    pub fn distance(&self, a: &Point<R>, b: &Point<R>) -> R {
        self.space().distance(a, b)
    }
}

impl<R: Real> std::fmt::Debug for SystemSpec<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SystemSpec").field("id", &self.id()).field("space", self.space()).finish_non_exhaustive()
    }
}
