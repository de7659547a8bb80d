use super::Semiflow;
use crate::error::{Error, Result};
use crate::measure::Point;
use crate::scalar::Real;

fn field_at<R: Real>(sys: &dyn Semiflow<R>, p: &[R]) -> Result<Vec<R>> {
    let mut q = Point(p.to_vec());
    sys.space().canonicalize(&mut q);
    sys.vector_field(&q).ok_or_else(|| Error::NoVectorField(sys.id().into()))
}

fn rk4_segment<R: Real>(sys: &dyn Semiflow<R>, x: &[R], t: R, max_step: R) -> Result<Vec<R>> {
    let n = (t / max_step).ceil().to_usize().unwrap_or(1).max(1);
    let h = t / R::c(n as f64);
    let half = h / R::c(2.0);
    let axpy = |a: &[R], k: &[R], s: R| -> Vec<R> { a.iter().zip(k).map(|(a, k)| *a + s * *k).collect() };
    let mut y = x.to_vec();
    for _ in 0..n {
        let k1 = field_at(sys, &y)?;
        let k2 = field_at(sys, &axpy(&y, &k1, half))?;
        let k3 = field_at(sys, &axpy(&y, &k2, half))?;
        let k4 = field_at(sys, &axpy(&y, &k3, h))?;
        let sixth = h / R::c(6.0);
        for i in 0..y.len() {
            y[i] = y[i] + sixth * (k1[i] + R::c(2.0) * (k2[i] + k3[i]) + k4[i]);
        }
    }
    Ok(y)
}

/// Classical fixed-step RK4 from `x` over `[0, t]`, in unwrapped coordinates.
///
/// The step is shrunk to `t / ceil(t / step)` so the horizon is hit exactly.
pub fn integrate_flow<R: Real>(sys: &dyn Semiflow<R>, t: R, x: &Point<R>, step: R) -> Result<Point<R>> {
    if t < R::zero() {
        return Err(Error::NegativeTime(t.to_f64().unwrap_or(f64::NAN)));
    }
    if !(step > R::zero()) {
        return Err(Error::InvalidArgument("integration step must be positive".into()));
    }
    if t > R::zero() && step > t {
        return Err(Error::StepTooLarge { step: step.to_f64().unwrap_or(f64::NAN), t: t.to_f64().unwrap_or(f64::NAN) });
    }
    if sys.vector_field(x).is_none() {
        return Err(Error::NoVectorField(sys.id().into()));
    }
    if t == R::zero() {
        return Ok(x.clone());
    }
    let mut p = Point(rk4_segment(sys, &x.0, t, step)?);
    sys.space().canonicalize(&mut p);
    Ok(p)
}

/// RK4 solution at each of the nondecreasing `times`, integrating segment by segment.
pub fn integrate_trajectory<R: Real>(sys: &dyn Semiflow<R>, x: &Point<R>, times: &[R], step: R) -> Result<Vec<Point<R>>> {
    if sys.vector_field(x).is_none() {
        return Err(Error::NoVectorField(sys.id().into()));
    }
    if !(step > R::zero()) {
        return Err(Error::InvalidArgument("integration step must be positive".into()));
    }
    let mut out = Vec::with_capacity(times.len());
    let mut y = x.0.clone();
    let mut prev = R::zero();
    for &t in times {
        let dt = t - prev;
        if dt < R::zero() {
            return Err(Error::InvalidArgument("times must be nondecreasing from 0".into()));
        }
        if dt > R::zero() {
            y = rk4_segment(sys, &y, dt, step)?;
        }
        let mut p = Point(y.clone());
        sys.space().canonicalize(&mut p);
        out.push(p);
        prev = t;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Result;
    use crate::measure::MetricSpace;
    use crate::systems::{CounterexampleParams, Counterexample, TimeKind};
    use crate::systems::zoo::Identity;

    struct Decay(MetricSpace);

    impl Semiflow<f64> for Decay {
        fn id(&self) -> &str {
            "decay"
        }
        fn space(&self) -> &MetricSpace {
            &self.0
        }
        fn time_kind(&self) -> TimeKind {
            TimeKind::Continuous
        }
        fn evolve(&self, t: &f64, x: &Point<f64>) -> Result<Point<f64>> {
            Ok(Point(vec![x[0] * (-t).exp()]))
        }
        fn vector_field(&self, x: &Point<f64>) -> Option<Vec<f64>> {
            Some(vec![-x[0]])
        }
    }

    #[test]
    fn zero_field_is_constant() {
        let sys = Identity::new(MetricSpace::torus(2));
        let x = Point(vec![0.2, 0.9]);
        assert_eq!(integrate_flow(&sys, 3.0, &x, 0.1).unwrap(), x);
    }

    #[test]
    fn exponential_decay() {
        let sys = Decay(MetricSpace::line());
        let y = integrate_flow(&sys, 1.0, &Point(vec![1.0]), 1e-3).unwrap();
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn step_larger_than_horizon() {
        let sys = Decay(MetricSpace::line());
        assert!(matches!(integrate_flow(&sys, 0.5, &Point(vec![1.0]), 1.0), Err(Error::StepTooLarge { .. })));
        assert_eq!(integrate_flow(&sys, 0.0, &Point(vec![1.0]), 1.0).unwrap().0, vec![1.0]);
    }

    #[test]
    fn counterexample_matches_closed_form() {
        let p = CounterexampleParams::<f64>::with_default_base(0.2).unwrap();
        let sys = Counterexample::new(p.base().clone(), 10_000).unwrap();
        let x = Point(vec![0.1, 0.4]);
        let mut start = x.clone();
        start.0.push(0.2);
        let num = integrate_flow(&sys, 10.0, &start, 1e-3).unwrap();
        let exact = p.flow(10.0, &x).unwrap();
        assert!(sys.space().distance(&num, &exact) < 1e-6);
    }
}
