use rayon::prelude::*;

use super::observable::TestFunction;
use super::space::{MetricSpace, Point};
use crate::error::{Error, Result};
use crate::numeric::{det_map_sum, det_sum};
use crate::scalar::Real;

/// Finite Borel measure represented as a weighted point ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleMeasure<R> {
    space: MetricSpace,
    points: Vec<Point<R>>,
    weights: Vec<R>,
}

impl<R: Real> ParticleMeasure<R> {
    /// Build a measure; rejects empty ensembles, negative or non-finite
    /// weights and points of the wrong dimension.
    pub fn new(space: MetricSpace, points: Vec<Point<R>>, weights: Vec<R>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), got: weights.len() });
        }
        for p in &points {
            space.check_dim(p)?;
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < R::zero()) {
            return Err(Error::BadWeight(w.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(ParticleMeasure { space, points, weights })
    }

    /// Equal weights `1/n`.
    pub fn uniform(space: MetricSpace, points: Vec<Point<R>>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::EmptyMeasure);
        }
        let w = R::one() / R::c(n as f64);
        Self::new(space, points, vec![w; n])
    }

    pub fn dirac(space: MetricSpace, p: Point<R>) -> Result<Self> {
        Self::new(space, vec![p], vec![R::one()])
    }

    /// Finite convex (or conic) combination `sum c_i mu_i`, concatenating particles.
    pub fn combination(parts: &[(R, &ParticleMeasure<R>)]) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptyMeasure)?.1;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (c, m) in parts {
            if m.space != first.space {
                return Err(Error::SpaceMismatch(first.space.id().into(), m.space.id().into()));
            }
            points.extend(m.points.iter().cloned());
            weights.extend(m.weights.iter().map(|w| *c * *w));
        }
        Self::new(first.space.clone(), points, weights)
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn points(&self) -> &[Point<R>] {
        &self.points
    }

    pub fn weights(&self) -> &[R] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point<R>, R)> {
        self.points.iter().zip(self.weights.iter().copied())
    }

    pub fn total_mass(&self) -> R {
        det_sum(&self.weights)
    }

    /// Rescale to a probability measure.
    pub fn normalize(&self) -> Result<Self> {
        let total = self.total_mass();
        if total <= R::zero() {
            return Err(Error::ZeroMass);
        }
        let weights = self.weights.iter().map(|w| *w / total).collect();
        Ok(ParticleMeasure { space: self.space.clone(), points: self.points.clone(), weights })
    }

    pub fn integrate(&self, g: &TestFunction<R>) -> R {
        self.integrate_fn(|p| g.eval(p))
    }

    /// `sum w_i f(x_i)` with a thread-count-independent reduction order.
    pub fn integrate_fn<F>(&self, f: F) -> R
    where
        F: Fn(&Point<R>) -> R + Sync + Send,
    {
        det_map_sum(self.points.len(), |i| self.weights[i] * f(&self.points[i]))
    }

    /// Move every particle by `map`; weights are untouched.
    pub fn pushforward<F>(&self, map: F) -> Result<Self>
    where
        F: Fn(&Point<R>) -> Point<R> + Sync + Send,
    {
        self.try_pushforward(|p| Ok(map(p)))
    }

    /// Fallible pushforward; particles landing outside the space yield `MapDomain`.
    pub fn try_pushforward<F>(&self, map: F) -> Result<Self>
    where
        F: Fn(&Point<R>) -> Result<Point<R>> + Sync + Send,
    {
        let points: Vec<Point<R>> = self.points.par_iter().map(&map).collect::<Result<_>>()?;
        if let Some(index) = points.iter().position(|p| !self.space.contains(p)) {
            return Err(Error::MapDomain { index, space: self.space.id().into() });
        }
        Ok(ParticleMeasure { space: self.space.clone(), points, weights: self.weights.clone() })
    }

    /// Same particles on a different (compatible) space description.
    pub fn with_space(&self, space: MetricSpace) -> Result<Self> {
        Self::new(space, self.points.clone(), self.weights.clone())
    }

    /// Mass of the particles satisfying `region`.
    pub fn mass_where<F>(&self, region: F) -> R
    where
        F: Fn(&Point<R>) -> bool + Sync + Send,
    {
        det_map_sum(self.points.len(), |i| if region(&self.points[i]) { self.weights[i] } else { R::zero() })
    }

    /// Conditional measure `mu(. | M)` for the membership predicate `region`.
    pub fn condition<F>(&self, region: F) -> Result<Self>
    where
        F: Fn(&Point<R>) -> bool + Sync + Send,
    {
        let keep: Vec<bool> = self.points.par_iter().map(&region).collect();
        self.condition_mask(&keep)
    }

    /// Conditioning on a precomputed membership mask.
    pub fn condition_mask(&self, keep: &[bool]) -> Result<Self> {
        let (points, weights): (Vec<_>, Vec<_>) = self
            .iter()
            .zip(keep)
            .filter(|(_, k)| **k)
            .map(|((p, w), _)| (p.clone(), w))
            .unzip();
        if points.is_empty() {
            return Err(Error::NullConditioning);
        }
        let total = det_sum(&weights);
        if total <= R::zero() {
            return Err(Error::NullConditioning);
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(ParticleMeasure { space: self.space.clone(), points, weights })
    }

    /// Marginal on a subset of axes.
    pub fn marginal(&self, axes: &[usize], space: MetricSpace) -> Result<Self> {
        let points = self
            .points
            .iter()
            .map(|p| Point(axes.iter().map(|&a| p.0[a]).collect()))
            .collect();
        Self::new(space, points, self.weights.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::density::{DensitySpec, Support};
    use proptest::prelude::*;

    fn line_measure(xs: &[f64], ws: &[f64]) -> ParticleMeasure<f64> {
        ParticleMeasure::new(MetricSpace::line(), xs.iter().map(|x| Point(vec![*x])).collect(), ws.to_vec()).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let m = line_measure(&[0.0, 1.0], &[2.0, 2.0]).normalize().unwrap();
        assert_eq!(m.weights(), &[0.5, 0.5]);
        let m = line_measure(&[0.3], &[1.0]).normalize().unwrap();
        assert_eq!(m.weights(), &[1.0]);
        assert_eq!(line_measure(&[0.0, 1.0], &[0.0, 0.0]).normalize(), Err(Error::ZeroMass));
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert_eq!(ParticleMeasure::<f64>::uniform(MetricSpace::line(), vec![]), Err(Error::EmptyMeasure));
        assert!(matches!(
            ParticleMeasure::new(MetricSpace::line(), vec![Point(vec![0.0])], vec![-1.0]),
            Err(Error::BadWeight(_))
        ));
        assert!(matches!(
            ParticleMeasure::new(MetricSpace::line(), vec![Point(vec![0.0, 1.0])], vec![1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn integrate_examples() {
        let d = ParticleMeasure::dirac(MetricSpace::line(), Point(vec![0.7])).unwrap();
        assert_eq!(d.integrate(&TestFunction::constant(1.0)), 1.0);
        let g = TestFunction::new(|p: &Point<f64>| (p[0] * 3.0).tanh(), 1.0, 3.0);
        let m = line_measure(&[0.1, -0.4], &[0.5, 0.5]);
        let expect = ((0.3f64).tanh() + (-1.2f64).tanh()) / 2.0;
        assert!((m.integrate(&g) - expect).abs() < 1e-15);
    }

    #[test]
    fn integrate_mean_of_uniform() {
        // exact integral of x over [0,1] is 1/2
        let spec = DensitySpec::uniform(MetricSpace::segment(0.0, 1.0), Support::boxed(vec![0.0], vec![1.0]));
        let m: ParticleMeasure<f64> = spec.sample(100_000, 11).unwrap();
        let g = TestFunction::new(|p: &Point<f64>| p[0], 1.0, 1.0);
        let stderr = (1.0f64 / 12.0).sqrt() / (1e5f64).sqrt();
        assert!((m.integrate(&g) - 0.5).abs() < 3.0 * stderr);
    }

    #[test]
    fn pushforward_examples() {
        let d = ParticleMeasure::dirac(MetricSpace::line(), Point(vec![0.25])).unwrap();
        assert_eq!(d.pushforward(|p| p.clone()).unwrap(), d);
        let m = line_measure(&[0.1, 0.5, 0.9], &[0.2, 0.3, 0.5]);
        let c = m.pushforward(|_| Point(vec![4.0])).unwrap();
        assert!(c.points().iter().all(|p| p.0 == vec![4.0]));
        assert_eq!(c.total_mass(), m.total_mass());
    }

    #[test]
    fn pushforward_leaving_domain() {
        let m = ParticleMeasure::uniform(MetricSpace::segment(0.0, 1.0), vec![Point(vec![0.2]), Point(vec![0.9])]).unwrap();
        assert_eq!(
            m.pushforward(|p| Point(vec![p[0] * 2.0])),
            Err(Error::MapDomain { index: 1, space: "segment[0,1]".into() })
        );
    }

    #[test]
    fn condition_examples() {
        let m = line_measure(&[0.0, 1.0, 2.0, 3.0], &[0.25; 4]);
        let full = m.condition(|_| true).unwrap();
        assert_eq!(full, m.normalize().unwrap());
        let half = m.condition(|p| p[0] < 1.5).unwrap();
        assert_eq!(half.weights(), &[0.5, 0.5]);
        assert_eq!(half.len(), 2);
        assert_eq!(m.condition(|p| p[0] > 10.0), Err(Error::NullConditioning));
    }

    proptest! {
        #[test]
        fn mass_conserved_and_linear(xs in prop::collection::vec(-5.0f64..5.0, 1..40),
                                     ws in prop::collection::vec(0.0f64..3.0, 40),
                                     a in 0.0f64..1.0) {
            let ws = &ws[..xs.len()];
            let nu1 = line_measure(&xs, ws);
            let nu2 = line_measure(&xs.iter().map(|x| x * 0.5 + 1.0).collect::<Vec<_>>(), ws);
            let map = |p: &Point<f64>| Point(vec![(p[0] * 1.7).sin() + p[0] * p[0]]);
            let pushed = nu1.pushforward(map).unwrap();
            prop_assert_eq!(pushed.total_mass().to_bits(), nu1.total_mass().to_bits());
            let mix = ParticleMeasure::combination(&[(a, &nu1), (1.0 - a, &nu2)]).unwrap();
            let lhs = mix.pushforward(map).unwrap();
            let rhs = ParticleMeasure::combination(&[(a, &pushed), (1.0 - a, &nu2.pushforward(map).unwrap())]).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn condition_integrate_restricted_sum(xs in prop::collection::vec(-5.0f64..5.0, 1..60),
                                              ws in prop::collection::vec(0.01f64..3.0, 60),
                                              cut in -5.0f64..5.0) {
            let m = line_measure(&xs, &ws[..xs.len()]);
            let region = |p: &Point<f64>| p[0] <= cut;
            let mass = m.mass_where(region);
            prop_assume!(mass > 0.0);
            let g = |p: &Point<f64>| p[0].cos();
            let lhs = m.condition(region).unwrap().integrate_fn(g) * mass;
            let rhs: f64 = m.iter().filter(|(p, _)| region(p)).map(|(p, w)| w * g(p)).sum();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
