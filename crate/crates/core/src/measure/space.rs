use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

/// Topology of one coordinate axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis {
    /// Unit-period circle, canonical range `[0, 1)`.
    Periodic,
    /// Closed segment `[lo, hi]`.
    Segment { lo: f64, hi: f64 },
    /// The whole real line.
    Line,
}

impl Axis {
    fn span(&self) -> f64 {
        match *self {
            Axis::Periodic => 0.5,
            Axis::Segment { lo, hi } => hi - lo,
            Axis::Line => f64::INFINITY,
        }
    }
}

/// A point of some [`MetricSpace`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Point<S>(pub Vec<S>);

impl<S: Scalar> Point<S> {
    pub fn new(coords: Vec<S>) -> Self {
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[S] {
        &self.0
    }

    pub fn to_real<R: Real>(&self) -> Point<R> {
        Point(self.0.iter().map(|c| c.to_real()).collect())
    }
}

impl<S> std::ops::Index<usize> for Point<S> {
    type Output = S;
    fn index(&self, i: usize) -> &S {
        &self.0[i]
    }
}

impl<S: fmt::Display> fmt::Display for Point<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Product of circles, segments and lines with the flat Euclidean metric.
///
/// Periodic axes contribute `min(|a-b|, 1-|a-b|)` before the Euclidean
/// combination.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace {
    id: String,
    axes: Vec<Axis>,
}

impl MetricSpace {
    pub fn new(id: impl Into<String>, axes: Vec<Axis>) -> Self {
        MetricSpace { id: id.into(), axes }
    }

    pub fn circle() -> Self {
        Self::new("circle", vec![Axis::Periodic])
    }

    pub fn torus(dim: usize) -> Self {
        Self::new(format!("torus{dim}"), vec![Axis::Periodic; dim])
    }

    pub fn line() -> Self {
        Self::new("line", vec![Axis::Line])
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::new(format!("R{dim}"), vec![Axis::Line; dim])
    }

    pub fn segment(lo: f64, hi: f64) -> Self {
        Self::new(format!("segment[{lo},{hi}]"), vec![Axis::Segment { lo, hi }])
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Diameter of the space (infinite if any axis is a line).
    pub fn diameter(&self) -> f64 {
        self.axes.iter().map(|a| a.span() * a.span()).sum::<f64>().sqrt()
    }

    pub fn is_periodic(&self, axis: usize) -> bool {
        matches!(self.axes[axis], Axis::Periodic)
    }

    /// Wrap periodic coordinates into `[0, 1)`.
    pub fn canonicalize<S: Scalar>(&self, p: &mut Point<S>) {
        for (c, a) in p.0.iter_mut().zip(&self.axes) {
            if matches!(a, Axis::Periodic) {
                *c = c.wrap_unit();
            }
        }
    }

    pub fn check_dim<S>(&self, p: &Point<S>) -> Result<()> {
        if p.0.len() != self.axes.len() {
            return Err(Error::DimensionMismatch { expected: self.axes.len(), got: p.0.len() });
        }
        Ok(())
    }

    /// Membership in the declared domain; periodic coordinates must be canonical.
    pub fn contains<S: Scalar>(&self, p: &Point<S>) -> bool {
        if p.0.len() != self.axes.len() {
            return false;
        }
        p.0.iter().zip(&self.axes).all(|(c, a)| match *a {
            Axis::Periodic => *c >= S::zero() && *c < S::one(),
            Axis::Segment { lo, hi } => {
                let v = c.to_f64().unwrap_or(f64::NAN);
                v >= lo && v <= hi
            }
            Axis::Line => c.to_f64().is_some_and(f64::is_finite),
        })
    }

    /// Signed displacement `b - a` along one axis, shortest way round on circles.
    pub fn axis_delta<R: Real>(&self, axis: usize, a: R, b: R) -> R {
        let d = b - a;
        if matches!(self.axes[axis], Axis::Periodic) {
            let half = R::c(0.5);
            d - (d + half).floor()
        } else {
            d
        }
    }

    /// Flat metric distance.
    pub fn distance<R: Real>(&self, a: &Point<R>, b: &Point<R>) -> R {
        debug_assert_eq!(a.0.len(), self.axes.len());
        debug_assert_eq!(b.0.len(), self.axes.len());
        if self.axes.len() == 1 {
            return self.axis_dist(0, a.0[0], b.0[0]);
        }
        let mut acc = R::zero();
        for i in 0..self.axes.len() {
            let d = self.axis_dist(i, a.0[i], b.0[i]);
            acc = acc + d * d;
        }
        acc.sqrt()
    }

    #[inline]
    fn axis_dist<R: Real>(&self, axis: usize, a: R, b: R) -> R {
        let d = (a - b).abs();
        match self.axes[axis] {
            Axis::Periodic => {
                // canonical coordinates already give d < 1
                let d = if d < R::one() { d } else { d - d.floor() };
                d.min(R::one() - d)
            }
            _ => d,
        }
    }
}
