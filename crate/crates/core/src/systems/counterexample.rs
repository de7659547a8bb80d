//! Skew-product flow whose invariant measure is attracting but neither
//! physical nor ergodic.
//!
//! With `F(t) = 1/(t log t)` on `(1, inf)`, the fiber field is
//! `b2(y) = sgn(y) F'(F^{-1}(|y|))` and the full field on `X~ x R` is
//! `b(x, y) = (y b~(x), b2(y))`. Its flow has the closed form
//! `f^t(x, y) = (f~^{psi(t)} x, phi(t))` with
//! `phi(t) = sgn(y) F(t + c)`, `psi(t) = sgn(y)(loglog(t + c) - loglog(c))`
//! and `c = F^{-1}(|y|)`.

use std::sync::Arc;

use super::{check_time, Semiflow, TimeKind};
use crate::error::{Error, Result};
use crate::measure::{Axis, MetricSpace, Point};
use crate::scalar::Real;

fn domain<R: Real>(what: &str, v: R) -> Error {
    Error::DomainError(format!("{what} outside domain at {}", v.to_f64().unwrap_or(f64::NAN)))
}

/// `F(t) = 1/(t log t)`, `t > 1`.
pub fn f_eval<R: Real>(t: R) -> Result<R> {
    if !(t > R::one()) {
        return Err(domain("F", t));
    }
    Ok(R::one() / (t * t.ln()))
}

/// `F'(t) = -(1 + log t)/(t^2 log^2 t)`.
pub fn f_prime<R: Real>(t: R) -> Result<R> {
    if !(t > R::one()) {
        return Err(domain("F'", t));
    }
    let l = t.ln();
    Ok(-(R::one() + l) / (t * t * l * l))
}

/// `F''(t) = (2 log^2 t + 3 log t + 2)/(t^3 log^3 t)`.
pub fn f_second<R: Real>(t: R) -> Result<R> {
    if !(t > R::one()) {
        return Err(domain("F''", t));
    }
    let l = t.ln();
    let num = R::c(2.0) * l * l + R::c(3.0) * l + R::c(2.0);
    Ok(num / (t * t * t * l * l * l))
}

/// `F^{-1}(y)` for `y > 0`: bisection on `t log t = 1/y`, then safeguarded
/// Newton until the relative residual of `F` is below `1e-13`.
pub fn f_inv<R: Real>(y: R) -> Result<R> {
    if !(y > R::zero()) || !y.is_finite() {
        return Err(domain("F^-1", y));
    }
    let target = y.recip();
    let h = |t: R| t * t.ln() - target;
    let tol = R::c(1e-13).max(R::epsilon() * R::c(64.0));
    let mut lo = R::one();
    let two_over_y = R::c(2.0) / y;
    let mut hi = R::c(3.0).max(two_over_y * two_over_y.ln());
    while h(hi) <= R::zero() {
        hi = hi * R::c(2.0);
    }
    // coarse bisection to a relative bracket of 1e-4
    let mut guard = 0;
    while (hi - lo) > R::c(1e-4) * lo && guard < 200 {
        let mid = lo + (hi - lo) / R::c(2.0);
        if h(mid) > R::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
        guard += 1;
    }
    let mut t = lo + (hi - lo) / R::c(2.0);
    for _ in 0..100 {
        let r = h(t);
        if (r * y).abs() <= tol {
            return Ok(t);
        }
        if r > R::zero() {
            hi = t;
        } else {
            lo = t;
        }
        let mut next = t - r / (R::one() + t.ln());
        if !(next > lo && next < hi) {
            next = lo + (hi - lo) / R::c(2.0);
        }
        if next == t {
            return Ok(t);
        }
        t = next;
    }
    Ok(t)
}

/// Fiber component of the field; `b2(0) = 0`.
pub fn b2<R: Real>(y: R) -> Result<R> {
    if y == R::zero() {
        return Ok(R::zero());
    }
    Ok(y.signum() * f_prime(f_inv(y.abs())?)?)
}

/// `b2'(y) = F''(F^{-1}(|y|)) / F'(F^{-1}(|y|))`, `y != 0`; the limit at 0 is 0.
pub fn b2_prime<R: Real>(y: R) -> Result<R> {
    if y == R::zero() {
        return Err(domain("b2'", y));
    }
    let c = f_inv(y.abs())?;
    Ok(f_second(c)? / f_prime(c)?)
}

/// Base flow `f~` on `X~`, defined for all real times.
pub trait BaseFlow<R: Real>: Send + Sync {
    fn space(&self) -> &MetricSpace;

    fn flow(&self, s: R, x: &Point<R>) -> Point<R>;

    fn field(&self, x: &Point<R>) -> Vec<R>;

    /// Roughly `n` base points covering `X~`, used to bound the field.
    fn grid(&self, n: usize) -> Vec<Point<R>>;
}

/// Linear flow `x' = omega` on the torus.
#[derive(Debug, Clone)]
pub struct LinearTorusFlow<R> {
    omega: Vec<R>,
    space: MetricSpace,
}

impl<R: Real> LinearTorusFlow<R> {
    pub fn new(omega: Vec<R>) -> Self {
        let space = MetricSpace::torus(omega.len());
        LinearTorusFlow { omega, space }
    }
}

impl<R: Real> BaseFlow<R> for LinearTorusFlow<R> {
    fn space(&self) -> &MetricSpace {
        &self.space
    }

    fn flow(&self, s: R, x: &Point<R>) -> Point<R> {
        Point(x.0.iter().zip(&self.omega).map(|(c, w)| (*c + *w * s).wrap_unit()).collect())
    }

    fn field(&self, _x: &Point<R>) -> Vec<R> {
        self.omega.clone()
    }

    fn grid(&self, n: usize) -> Vec<Point<R>> {
        let d = self.omega.len();
        let per = ((n as f64).powf(1.0 / d as f64).round() as usize).max(1);
        let mut pts = vec![vec![]];
        for _ in 0..d {
            pts = pts
                .into_iter()
                .flat_map(|p: Vec<R>| {
                    (0..per).map(move |k| {
                        let mut q = p.clone();
                        q.push(R::c(k as f64 / per as f64));
                        q
                    })
                })
                .collect();
        }
        pts.into_iter().map(Point).collect()
    }
}

fn sampled_field_bound<R: Real>(base: &dyn BaseFlow<R>, grid: usize) -> R {
    let m = base
        .grid(grid)
        .iter()
        .map(|p| base.field(p).iter().map(|v| *v * *v).fold(R::zero(), |a, b| a + b).sqrt())
        .fold(R::zero(), R::max);
    m * R::c(1.05)
}

/// Counterexample parameters: initial fiber value and base flow.
#[derive(Clone)]
pub struct CounterexampleParams<R: Real> {
    y0: R,
    c: Option<R>,
    base: Arc<dyn BaseFlow<R>>,
    field_bound: R,
}

impl<R: Real> CounterexampleParams<R> {
    pub fn new(y0: R, base: Arc<dyn BaseFlow<R>>, field_grid: usize) -> Result<Self> {
        let c = if y0 == R::zero() { None } else { Some(f_inv(y0.abs())?) };
        let field_bound = sampled_field_bound(base.as_ref(), field_grid);
        Ok(CounterexampleParams { y0, c, base, field_bound })
    }

    /// Default base: linear flow with frequencies `(1, sqrt 2)`.
    pub fn with_default_base(y0: R) -> Result<Self> {
        Self::new(y0, Arc::new(LinearTorusFlow::new(vec![R::one(), R::SQRT_2()])), 10_000)
    }

    pub fn y0(&self) -> R {
        self.y0
    }

    /// `F^{-1}(|y0|)`; `None` on the fixed fiber `y0 = 0`.
    pub fn c(&self) -> Option<R> {
        self.c
    }

    pub fn base(&self) -> &Arc<dyn BaseFlow<R>> {
        &self.base
    }

    /// Sampled bound `M` on the base field norm (with a 1.05 safety factor).
    pub fn field_bound(&self) -> R {
        self.field_bound
    }

    pub fn phi(&self, t: R) -> Result<R> {
        match self.c {
            None => Ok(R::zero()),
            Some(c) => Ok(self.y0.signum() * f_eval(t + c)?),
        }
    }

    pub fn psi(&self, t: R) -> Result<R> {
        match self.c {
            None => Ok(R::zero()),
            Some(c) => {
                let (a, b) = ((t + c).ln(), c.ln());
                if !(a > R::zero() && b > R::zero()) {
                    return Err(domain("loglog", t + c));
                }
                Ok(self.y0.signum() * (a.ln() - b.ln()))
            }
        }
    }

    /// Closed-form flow from base point `x` on the fiber `y0`.
    pub fn flow(&self, t: R, x: &Point<R>) -> Result<Point<R>> {
        check_time(TimeKind::Continuous, &t)?;
        let mut out = if t == R::zero() { x.clone() } else { self.base.flow(self.psi(t)?, x) };
        out.0.push(if t == R::zero() { self.y0 } else { self.phi(t)? });
        Ok(out)
    }

    /// Skew-product field at `p = (x, y)`.
    pub fn field(&self, p: &Point<R>) -> Result<Vec<R>> {
        skew_field(self.base.as_ref(), p)
    }
}

fn skew_field<R: Real>(base: &dyn BaseFlow<R>, p: &Point<R>) -> Result<Vec<R>> {
    let d = p.dim() - 1;
    let y = p[d];
    let x = Point(p.0[..d].to_vec());
    let mut v: Vec<R> = base.field(&x).into_iter().map(|b| y * b).collect();
    v.push(b2(y)?);
    Ok(v)
}

/// The counterexample as a semiflow on `X~ x R`.
#[derive(Clone)]
pub struct Counterexample<R: Real> {
    base: Arc<dyn BaseFlow<R>>,
    space: MetricSpace,
    field_bound: R,
}

impl<R: Real> Counterexample<R> {
    pub fn new(base: Arc<dyn BaseFlow<R>>, field_grid: usize) -> Result<Self> {
        let mut axes = base.space().axes().to_vec();
        axes.push(Axis::Line);
        let space = MetricSpace::new(format!("{}xR", base.space().id()), axes);
        let field_bound = sampled_field_bound(base.as_ref(), field_grid);
        Ok(Counterexample { base, space, field_bound })
    }

    pub fn field_bound(&self) -> R {
        self.field_bound
    }

    /// Parameters for the fiber through `p`.
    pub fn params_at(&self, p: &Point<R>) -> Result<CounterexampleParams<R>> {
        let y = p[p.dim() - 1];
        let c = if y == R::zero() { None } else { Some(f_inv(y.abs())?) };
        Ok(CounterexampleParams { y0: y, c, base: self.base.clone(), field_bound: self.field_bound })
    }

    fn split(p: &Point<R>) -> Point<R> {
        Point(p.0[..p.dim() - 1].to_vec())
    }
}

impl<R: Real> Semiflow<R> for Counterexample<R> {
    fn id(&self) -> &str {
        "counterexample"
    }

    fn space(&self) -> &MetricSpace {
        &self.space
    }

    fn time_kind(&self) -> TimeKind {
        TimeKind::Continuous
    }

    fn evolve(&self, t: &R, x: &Point<R>) -> Result<Point<R>> {
        check_time(TimeKind::Continuous, t)?;
        if *t == R::zero() {
            return Ok(x.clone());
        }
        self.params_at(x)?.flow(*t, &Self::split(x))
    }

    fn vector_field(&self, x: &Point<R>) -> Option<Vec<R>> {
        skew_field(self.base.as_ref(), x).ok()
    }

    fn trajectory(&self, x: &Point<R>, times: &[R]) -> Result<Vec<Point<R>>> {
        let params = self.params_at(x)?;
        let base = Self::split(x);
        times.iter().map(|t| params.flow(*t, &base)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn torus_dist(a: &Point<f64>, b: &Point<f64>) -> f64 {
        let mut axes = vec![Axis::Periodic; 2];
        axes.push(Axis::Line);
        MetricSpace::new("t", axes).distance(a, b)
    }

    #[test]
    fn f_at_e() {
        let e = std::f64::consts::E;
        assert!((f_eval(e).unwrap() - 1.0 / e).abs() < 1e-15);
        assert!((f_prime(e).unwrap() + 2.0 / (e * e)).abs() < 1e-15);
        // F''(e) = 7/e^3
        assert!((f_second(e).unwrap() - 7.0 / (e * e * e)).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for t in [1.5f64, 2.0, 10.0, 1e3] {
            let h = 1e-5 * t;
            let fd1 = (f_eval(t + h).unwrap() - f_eval(t - h).unwrap()) / (2.0 * h);
            let fd2 = (f_prime(t + h).unwrap() - f_prime(t - h).unwrap()) / (2.0 * h);
            assert!((fd1 / f_prime(t).unwrap() - 1.0).abs() < 1e-6, "F' at {t}");
            assert!((fd2 / f_second(t).unwrap() - 1.0).abs() < 1e-6, "F'' at {t}");
        }
    }

    #[test]
    fn inverse_identity() {
        for t in [2.0f64, 10.0, 1e6] {
            let back = f_inv(f_eval(t).unwrap()).unwrap();
            assert!((back / t - 1.0).abs() < 1e-12, "{t} -> {back}");
        }
        for y in [1e-8f64, 1e-4, 0.2, 0.5, 3.0, 1e3] {
            let t = f_inv(y).unwrap();
            assert!((f_eval(t).unwrap() / y - 1.0).abs() < 1e-12, "{y}");
        }
        assert!(f_inv(0.0f64).is_err());
        assert!(f_inv(-1.0f64).is_err());
        assert!(f_eval(1.0f64).is_err());
        assert!(f_prime(0.5f64).is_err());
    }

    #[test]
    fn f32_inverse_works() {
        let t = f_inv(0.2f32).unwrap();
        assert!((f_eval(t).unwrap() / 0.2 - 1.0).abs() < 1e-5);
    }

    #[test]
    fn flow_initial_and_fixed_fiber() {
        let p = CounterexampleParams::<f64>::with_default_base(0.2).unwrap();
        let x = Point(vec![0.3, 0.7]);
        assert_eq!(p.flow(0.0, &x).unwrap().0, vec![0.3, 0.7, 0.2]);
        let z = CounterexampleParams::<f64>::with_default_base(0.0).unwrap();
        assert_eq!(z.flow(17.5, &x).unwrap().0, vec![0.3, 0.7, 0.0]);
        assert!(matches!(p.flow(-1.0, &x), Err(Error::NegativeTime(_))));
    }

    #[test]
    fn field_zero_on_fixed_fiber_and_odd() {
        let p = CounterexampleParams::<f64>::with_default_base(0.2).unwrap();
        assert_eq!(p.field(&Point(vec![0.1, 0.2, 0.0])).unwrap(), vec![0.0, 0.0, 0.0]);
        for y in [0.01f64, 0.3, 2.0] {
            assert_eq!(b2(-y).unwrap(), -b2(y).unwrap());
        }
    }

    #[test]
    fn field_is_time_derivative_of_flow() {
        // central-difference oracle at t = h around t = 0 via the semiflow
        let x = Point(vec![0.25, 0.5]);
        for y0 in [0.05f64, 0.2] {
            let p = CounterexampleParams::with_default_base(y0).unwrap();
            let h = 1e-5;
            let fwd = p.flow(2.0 * h, &x).unwrap();
            let mid = p.flow(h, &x).unwrap();
            let start = p.flow(0.0, &x).unwrap();
            let field = p.field(&mid).unwrap();
            let base = MetricSpace::torus(2);
            for i in 0..3 {
                let delta = if i < 2 { base.axis_delta(i, start[i], fwd[i]) } else { fwd[i] - start[i] };
                assert!((delta / (2.0 * h) - field[i]).abs() < 1e-6, "y0={y0} axis {i}");
            }
            // field at t = 0 itself
            let f0 = p.field(&start).unwrap();
            assert!((f0[0] - y0).abs() < 1e-15);
            assert!((f0[1] - y0 * std::f64::consts::SQRT_2).abs() < 1e-15);
        }
    }

    #[test]
    fn b2_prime_examples() {
        assert_eq!(b2_prime(1e-3f64).unwrap(), b2_prime(-1e-3f64).unwrap());
        assert!(b2_prime(1e-4f64).unwrap().abs() <= 0.01);
        let y = 0.1f64;
        let h = 1e-6;
        let fd = (b2(y + h).unwrap() - b2(y - h).unwrap()) / (2.0 * h);
        assert!((fd - b2_prime(y).unwrap()).abs() < 1e-6);
        assert!(b2_prime(0.0f64).is_err());
    }

    #[test]
    fn field_bound_default() {
        let p = CounterexampleParams::<f64>::with_default_base(0.2).unwrap();
        assert!((p.field_bound() - 1.05 * 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn phi_psi_monotone_on_geometric_grid() {
        let p = CounterexampleParams::<f64>::with_default_base(0.2).unwrap();
        let mut prev = (p.phi(0.0).unwrap(), p.psi(0.0).unwrap());
        let mut t = 1e-3;
        while t <= 1e8 {
            let cur = (p.phi(t).unwrap(), p.psi(t).unwrap());
            assert!(cur.0 < prev.0 && cur.0 > 0.0);
            assert!(cur.1 > prev.1);
            prev = cur;
            t *= 2.0;
        }
        assert!(prev.0 < 1e-8);
        assert!(prev.1 > 2.0);
    }

    proptest! {
        #[test]
        fn closed_form_semiflow_law(s in 0.0f64..5.0, t in 0.0f64..5.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let p = CounterexampleParams::with_default_base(0.2).unwrap();
            let sys = Counterexample::new(p.base().clone(), 10_000).unwrap();
            let x = Point(vec![a, b]);
            let lhs = p.flow(s + t, &x).unwrap();
            let rhs = sys.evolve(&s, &p.flow(t, &x).unwrap()).unwrap();
            prop_assert!(torus_dist(&lhs, &rhs) < 1e-9);
        }

        #[test]
        fn negative_fiber_mirrors(t in 0.0f64..20.0, y in 0.01f64..0.6) {
            let pos = CounterexampleParams::with_default_base(y).unwrap();
            let neg = CounterexampleParams::with_default_base(-y).unwrap();
            prop_assert_eq!(pos.phi(t).unwrap(), -neg.phi(t).unwrap());
            prop_assert_eq!(pos.psi(t).unwrap(), -neg.psi(t).unwrap());
        }
    }
}
