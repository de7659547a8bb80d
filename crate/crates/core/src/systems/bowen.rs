use super::{SystemSpec, TimeKind};
use crate::error::{Error, Result};
use crate::measure::Point;
use crate::scalar::Real;

/// A system with horizon `tau` and the time grid realizing the Bowen metric
/// `d_tau(x, y) = max_{0 <= t <= tau} d(f^t x, f^t y)`.
#[derive(Clone, Debug)]
pub struct BowenContext<R: Real> {
    system: SystemSpec<R>,
    tau: R,
    grid: Vec<R>,
}

impl<R: Real> BowenContext<R> {
    /// Discrete systems use every integer in `0..=tau`. Continuous systems
    /// use a uniform grid of spacing at most `0.05 min(1, delta / L)` with
    /// `L` the declared speed bound; the interval count is even so `tau/2`
    /// is a node.
    pub fn new(system: SystemSpec<R>, tau: R, delta: Option<R>) -> Result<Self> {
        if tau < R::zero() || !tau.is_finite() {
            return Err(Error::InvalidArgument(format!("horizon {}", tau.to_f64().unwrap_or(f64::NAN))));
        }
        let grid = match system.time_kind() {
            TimeKind::Discrete => {
                if tau.fract() != R::zero() {
                    return Err(Error::NonIntegralTime(tau.to_f64().unwrap_or(f64::NAN)));
                }
                let n = tau.to_usize().unwrap_or(0);
                (0..=n).map(|k| R::c(k as f64)).collect()
            }
            TimeKind::Continuous => {
                if tau == R::zero() {
                    vec![R::zero()]
                } else {
                    let l = system.speed_bound();
                    let spacing = match delta {
                        Some(d) if l > R::zero() => R::c(0.05) * R::one().min(d / l),
                        _ if l == R::zero() => tau,
                        _ => R::c(0.05),
                    };
                    let mut n = (tau / spacing).ceil().to_usize().unwrap_or(1).max(1);
                    n += n % 2;
                    (0..=n).map(|k| tau * R::c(k as f64) / R::c(n as f64)).collect()
                }
            }
        };
        Ok(BowenContext { system, tau, grid })
    }

    /// Explicit grid; must start at 0 and increase strictly.
    pub fn with_grid(system: SystemSpec<R>, grid: Vec<R>) -> Result<Self> {
        if grid.first() != Some(&R::zero()) {
            return Err(Error::InvalidArgument("Bowen grid must start at 0".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("Bowen grid must increase strictly".into()));
        }
        let tau = *grid.last().unwrap_or(&R::zero());
        Ok(BowenContext { system, tau, grid })
    }

    pub fn system(&self) -> &SystemSpec<R> {
        &self.system
    }

    pub fn tau(&self) -> R {
        self.tau
    }

    pub fn grid(&self) -> &[R] {
        &self.grid
    }

    /// Middle grid node: `tau/2` for continuous grids, `floor(tau/2)` for maps.
    pub fn half_time(&self) -> R {
        self.grid[(self.grid.len() - 1) / 2]
    }

    /// Orbit of `x` at the grid times.
    pub fn orbit(&self, x: &Point<R>) -> Result<Vec<Point<R>>> {
        self.system.trajectory(x, &self.grid)
    }

    pub fn orbit_distance(&self, a: &[Point<R>], b: &[Point<R>]) -> R {
        let space = self.system.space();
        a.iter().zip(b).map(|(p, q)| space.distance(p, q)).fold(R::zero(), R::max)
    }

    /// `orbit_distance(a, b) < r`, stopping at the first grid time that fails.
    pub fn orbits_within(&self, a: &[Point<R>], b: &[Point<R>], r: R) -> bool {
        let space = self.system.space();
        a.iter().zip(b).all(|(p, q)| space.distance(p, q) < r)
    }

    pub fn bowen_distance(&self, x: &Point<R>, y: &Point<R>) -> Result<R> {
        Ok(self.orbit_distance(&self.orbit(x)?, &self.orbit(y)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{build_system, ZooParams};
    use proptest::prelude::*;

    fn sys(id: &str) -> SystemSpec<f64> {
        build_system(id, &ZooParams::default()).unwrap()
    }

    #[test]
    fn zero_horizon_is_base_metric() {
        let ctx = BowenContext::new(sys("cat"), 0.0, None).unwrap();
        let (x, y) = (Point(vec![0.1, 0.2]), Point(vec![0.4, 0.9]));
        assert_eq!(ctx.bowen_distance(&x, &y).unwrap(), ctx.system().distance(&x, &y));
        assert_eq!(ctx.bowen_distance(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn doubling_separation_doubles() {
        let ctx = BowenContext::new(sys("doubling"), 9.0, None).unwrap();
        let d = ctx.bowen_distance(&Point(vec![0.0]), &Point(vec![2f64.powi(-10)])).unwrap();
        assert_eq!(d, 0.5);
        assert_eq!(ctx.grid().len(), 10);
    }

    #[test]
    fn continuous_grid_shape() {
        let ctx = BowenContext::new(sys("rotation"), 3.0, Some(0.02)).unwrap();
        let g = ctx.grid();
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 3.0);
        assert_eq!((g.len() - 1) % 2, 0);
        assert_eq!(ctx.half_time(), 1.5);
        assert_eq!(BowenContext::new(sys("doubling"), 5.0, None).unwrap().half_time(), 2.0);
        assert!(g.windows(2).all(|w| w[1] - w[0] <= 0.05 * 0.02 + 1e-15));
        assert!(BowenContext::with_grid(sys("rotation"), vec![0.0, 1.0, 1.0]).is_err());
        assert!(BowenContext::with_grid(sys("rotation"), vec![0.5, 1.0]).is_err());
        assert!(BowenContext::new(sys("doubling"), 2.5, None).is_err());
    }

    proptest! {
        #[test]
        fn bowen_metric_properties(a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0,
                                   d in 0.5f64..1.5, e in 0.5f64..1.5, f in 0.5f64..1.5, tau in 0u32..8) {
            let ctx = BowenContext::new(sys("doubling_contract"), tau as f64, None).unwrap();
            let (x, y, z) = (Point(vec![a, d]), Point(vec![b, e]), Point(vec![c, f]));
            let dxy = ctx.bowen_distance(&x, &y).unwrap();
            prop_assert_eq!(dxy, ctx.bowen_distance(&y, &x).unwrap());
            prop_assert!(dxy <= ctx.bowen_distance(&x, &z).unwrap() + ctx.bowen_distance(&z, &y).unwrap() + 1e-12);
            prop_assert!(dxy >= ctx.system().distance(&x, &y));
            if tau > 0 {
                let shorter = BowenContext::new(sys("doubling_contract"), (tau - 1) as f64, None).unwrap();
                prop_assert!(shorter.bowen_distance(&x, &y).unwrap() <= dxy);
            }
        }
    }
}
