use crate::error::{Error, Result};
use crate::measure::{DensitySpec, MetricSpace, ParticleMeasure, Point, Support};
use crate::scalar::Real;

/// A declared compact invariant set `A` with a candidate measure on it.
pub trait Attractor<R: Real>: Send + Sync {
    fn space(&self) -> &MetricSpace;

    /// `n` i.i.d. samples of the candidate measure.
    fn sample(&self, n: usize, seed: u64) -> Result<ParticleMeasure<R>>;

    /// Deterministic equal-weight quadrature of the candidate measure.
    fn quadrature(&self, nodes: usize) -> Result<ParticleMeasure<R>>;

    fn contains(&self, p: &Point<R>, tol: R) -> bool;

    /// Dimension of the parametrization (0 if none).
    fn param_dim(&self) -> usize;

    fn point_at(&self, params: &[R]) -> Point<R>;

    fn params_of(&self, p: &Point<R>) -> Vec<R>;

    /// Nearest point of `A`, used as the analytic orbit-tracking partner.
    fn project(&self, x: &Point<R>) -> Point<R>;

    /// The candidate measure as a density, when it has one on a coordinate box.
    fn density(&self) -> Option<&DensitySpec> {
        None
    }
}

/// Coordinate box with some axes pinned (`lo == hi`), carrying the uniform
/// measure over the free axes.
#[derive(Debug, Clone)]
pub struct BoxAttractor {
    density: DensitySpec,
    lo: Vec<f64>,
    hi: Vec<f64>,
    free: Vec<usize>,
}

impl BoxAttractor {
    pub fn new(space: MetricSpace, lo: Vec<f64>, hi: Vec<f64>) -> Self {
        let free = (0..lo.len()).filter(|&i| hi[i] > lo[i]).collect();
        let density = DensitySpec::uniform(space, Support::boxed(lo.clone(), hi.clone()));
        BoxAttractor { density, lo, hi, free }
    }

    pub fn density(&self) -> &DensitySpec {
        &self.density
    }
}

impl<R: Real> Attractor<R> for BoxAttractor {
    fn space(&self) -> &MetricSpace {
        &self.density.space
    }

    fn sample(&self, n: usize, seed: u64) -> Result<ParticleMeasure<R>> {
        self.density.sample(n, seed)
    }

    fn quadrature(&self, nodes: usize) -> Result<ParticleMeasure<R>> {
        if self.free.len() > 1 {
            // per-axis node count giving about `nodes` in total
            let per = (nodes as f64).powf(1.0 / self.free.len() as f64).round().max(1.0) as usize;
            return self.density.midpoint_quadrature(per);
        }
        self.density.midpoint_quadrature(nodes)
    }

    fn contains(&self, p: &Point<R>, tol: R) -> bool {
        let tol = tol.to_f64().unwrap_or(0.0);
        (0..self.lo.len()).all(|i| {
            let v = p[i].to_f64().unwrap_or(f64::NAN);
            self.density.space.is_periodic(i) && self.hi[i] - self.lo[i] >= 1.0
                || (v >= self.lo[i] - tol && v <= self.hi[i] + tol)
        })
    }

    fn param_dim(&self) -> usize {
        self.free.len()
    }

    fn point_at(&self, params: &[R]) -> Point<R> {
        let mut c: Vec<R> = self.lo.iter().map(|v| R::c(*v)).collect();
        for (k, &i) in self.free.iter().enumerate() {
            c[i] = params[k];
        }
        let mut p = Point(c);
        self.density.space.canonicalize(&mut p);
        p
    }

    fn params_of(&self, p: &Point<R>) -> Vec<R> {
        self.free.iter().map(|&i| p[i]).collect()
    }

    fn density(&self) -> Option<&DensitySpec> {
        Some(&self.density)
    }

    fn project(&self, x: &Point<R>) -> Point<R> {
        let c = (0..self.lo.len())
            .map(|i| {
                if self.density.space.is_periodic(i) && self.hi[i] - self.lo[i] >= 1.0 {
                    x[i]
                } else {
                    x[i].max(R::c(self.lo[i])).min(R::c(self.hi[i]))
                }
            })
            .collect();
        Point(c)
    }
}

/// Unit circle in the plane with normalized arc length.
#[derive(Debug, Clone)]
pub struct UnitCircleAttractor;

static PLANE: std::sync::OnceLock<MetricSpace> = std::sync::OnceLock::new();

fn plane() -> &'static MetricSpace {
    PLANE.get_or_init(|| MetricSpace::euclidean(2))
}

impl<R: Real> Attractor<R> for UnitCircleAttractor {
    fn space(&self) -> &MetricSpace {
        plane()
    }

    fn sample(&self, n: usize, seed: u64) -> Result<ParticleMeasure<R>> {
        let angles: ParticleMeasure<R> = DensitySpec::uniform(MetricSpace::circle(), Support::boxed(vec![0.0], vec![1.0])).sample(n, seed)?;
        let pts = angles.points().iter().map(|a| self.point_at(&[a[0]])).collect();
        ParticleMeasure::uniform(plane().clone(), pts)
    }

    fn quadrature(&self, nodes: usize) -> Result<ParticleMeasure<R>> {
        if nodes == 0 {
            return Err(Error::InvalidArgument("quadrature needs nodes".into()));
        }
        let pts = (0..nodes).map(|k| self.point_at(&[R::c((k as f64 + 0.5) / nodes as f64)])).collect();
        ParticleMeasure::uniform(plane().clone(), pts)
    }

    fn contains(&self, p: &Point<R>, tol: R) -> bool {
        ((p[0] * p[0] + p[1] * p[1]).sqrt() - R::one()).abs() <= tol
    }

    fn param_dim(&self) -> usize {
        1
    }

    fn point_at(&self, params: &[R]) -> Point<R> {
        let (s, c) = (R::TAU() * params[0]).sin_cos();
        Point(vec![c, s])
    }

    fn params_of(&self, p: &Point<R>) -> Vec<R> {
        let a = p[1].atan2(p[0]) / R::TAU();
        vec![if a < R::zero() { a + R::one() } else { a }]
    }

    fn project(&self, x: &Point<R>) -> Point<R> {
        self.point_at(&self.params_of(x))
    }
}
