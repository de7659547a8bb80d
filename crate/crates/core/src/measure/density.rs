use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use super::particle::ParticleMeasure;
use super::space::{MetricSpace, Point};
use crate::error::{Error, Result};
use crate::numeric::{stream_rng, CHUNK};
use crate::scalar::Real;

/// Region carrying an absolutely continuous initial law.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    /// Coordinate box; a periodic axis may extend past 1 (arc across 0).
    /// Axes with `lo == hi` are held fixed (lower-dimensional support).
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Euclidean ball in unwrapped coordinates.
    Ball { center: Vec<f64>, radius: f64 },
}

impl Support {
    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Support::Box { lo, hi }
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        Support::Ball { center, radius }
    }

    pub fn dim(&self) -> usize {
        match self {
            Support::Box { lo, .. } => lo.len(),
            Support::Ball { center, .. } => center.len(),
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            Support::Box { lo, hi } => lo.len() != hi.len() || lo.iter().zip(hi).any(|(l, h)| !(l <= h)),
            Support::Ball { radius, .. } => !(*radius >= 0.0),
        }
    }

    /// Lebesgue volume over the non-degenerate axes.
    pub fn volume(&self) -> f64 {
        match self {
            Support::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| h - l).filter(|w| *w > 0.0).product(),
            Support::Ball { center, radius } => ball_volume(center.len(), *radius),
        }
    }

    /// Membership, wrap-aware on periodic axes.
    pub fn contains<R: Real>(&self, space: &MetricSpace, p: &Point<R>) -> bool {
        let tol = 1e-12;
        match self {
            Support::Box { lo, hi } => (0..lo.len()).all(|i| {
                let v = p[i].to_f64().unwrap_or(f64::NAN);
                if space.is_periodic(i) && hi[i] - lo[i] < 1.0 {
                    let off = (v - lo[i]).rem_euclid(1.0);
                    off <= hi[i] - lo[i] + tol || off >= 1.0 - tol
                } else {
                    v >= lo[i] - tol && v <= hi[i] + tol
                }
            }),
            Support::Ball { center, radius } => {
                let r2: f64 = (0..center.len())
                    .map(|i| {
                        let mut d = p[i].to_f64().unwrap_or(f64::NAN) - center[i];
                        if space.is_periodic(i) {
                            d -= (d + 0.5).floor();
                        }
                        d * d
                    })
                    .sum();
                r2.sqrt() <= radius + tol
            }
        }
    }

    fn draw<G: Rng>(&self, rng: &mut G) -> Vec<f64> {
        match self {
            Support::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(l, h)| if h > l { rng.gen_range(*l..*h) } else { *l })
                .collect(),
            Support::Ball { center, radius } => loop {
                let off: Vec<f64> = center.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
                if off.iter().map(|o| o * o).sum::<f64>() < 1.0 {
                    break center.iter().zip(off).map(|(c, o)| c + radius * o).collect();
                }
            },
        }
    }
}

/// Volume of the Euclidean `d`-ball of radius `r`.
pub fn ball_volume(d: usize, r: f64) -> f64 {
    // V_d = V_{d-2} * 2 pi / d
    let unit = match d {
        0 => 1.0,
        1 => 2.0,
        _ => {
            let mut v = if d.is_multiple_of(2) { 1.0 } else { 2.0 };
            let mut k = if d.is_multiple_of(2) { 2 } else { 3 };
            while k <= d {
                v *= 2.0 * std::f64::consts::PI / k as f64;
                k += 2;
            }
            v
        }
    };
    unit * r.powi(d as i32)
}

pub type DensityFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum DensityRule {
    Uniform,
    /// Density `f` (w.r.t. Lebesgue on the support) with `f <= bound`,
    /// sampled by rejection.
    Weighted { f: DensityFn, bound: f64 },
}

impl fmt::Debug for DensityRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityRule::Uniform => write!(f, "Uniform"),
            DensityRule::Weighted { bound, .. } => write!(f, "Weighted {{ bound: {bound} }}"),
        }
    }
}

/// Absolutely continuous probability law, realized through sampling.
#[derive(Debug, Clone)]
pub struct DensitySpec {
    pub space: MetricSpace,
    pub support: Support,
    pub rule: DensityRule,
}

impl DensitySpec {
    pub fn uniform(space: MetricSpace, support: Support) -> Self {
        DensitySpec { space, support, rule: DensityRule::Uniform }
    }

    pub fn weighted<F>(space: MetricSpace, support: Support, f: F, bound: f64) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        DensitySpec { space, support, rule: DensityRule::Weighted { f: Arc::new(f), bound } }
    }

    fn validate(&self) -> Result<()> {
        if self.support.is_empty() {
            return Err(Error::BadSupport);
        }
        if self.support.dim() != self.space.dim() {
            return Err(Error::DimensionMismatch { expected: self.space.dim(), got: self.support.dim() });
        }
        if let DensityRule::Weighted { bound, .. } = self.rule {
            if !(bound > 0.0 && bound.is_finite()) {
                return Err(Error::InvalidArgument(format!("density bound {bound}")));
            }
        }
        Ok(())
    }

    fn draw_one<G: Rng>(&self, rng: &mut G) -> Vec<f64> {
        match &self.rule {
            DensityRule::Uniform => self.support.draw(rng),
            DensityRule::Weighted { f, bound } => loop {
                let x = self.support.draw(rng);
                if rng.gen::<f64>() * bound < f(&x) {
                    break x;
                }
            },
        }
    }

    /// `n` equal-weight i.i.d. particles; batch `k` uses random stream `k`.
    pub fn sample<R: Real>(&self, n: usize, seed: u64) -> Result<ParticleMeasure<R>> {
        self.validate()?;
        if n == 0 {
            return Err(Error::InvalidArgument("sample count must be >= 1".into()));
        }
        let points: Vec<Point<R>> = (0..n.div_ceil(CHUNK))
            .into_par_iter()
            .flat_map_iter(|b| {
                let mut rng = stream_rng(seed, b as u64);
                let count = CHUNK.min(n - b * CHUNK);
                (0..count)
                    .map(|_| {
                        let mut p = Point(self.draw_one(&mut rng).into_iter().map(R::c).collect());
                        self.space.canonicalize(&mut p);
                        p
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        ParticleMeasure::uniform(self.space.clone(), points)
    }

    /// Deterministic midpoint quadrature of the law on a box support:
    /// `nodes` points per non-degenerate axis, weights proportional to density.
    pub fn midpoint_quadrature<R: Real>(&self, nodes: usize) -> Result<ParticleMeasure<R>> {
        self.validate()?;
        let Support::Box { lo, hi } = &self.support else {
            return Err(Error::InvalidArgument("midpoint quadrature needs a box support".into()));
        };
        if nodes == 0 {
            return Err(Error::InvalidArgument("quadrature needs at least one node".into()));
        }
        let axes: Vec<Vec<f64>> = lo
            .iter()
            .zip(hi)
            .map(|(l, h)| {
                if h > l {
                    (0..nodes).map(|k| l + (h - l) * (k as f64 + 0.5) / nodes as f64).collect()
                } else {
                    vec![*l]
                }
            })
            .collect();
        let mut coords: Vec<Vec<f64>> = vec![vec![]];
        for axis in &axes {
            coords = coords
                .into_iter()
                .flat_map(|c| axis.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push(*v);
                    c
                }))
                .collect();
        }
        let weights: Vec<R> = coords
            .iter()
            .map(|c| match &self.rule {
                DensityRule::Uniform => R::one(),
                DensityRule::Weighted { f, .. } => R::c(f(c)),
            })
            .collect();
        let points = coords
            .into_iter()
            .map(|c| {
                let mut p = Point(c.into_iter().map(R::c).collect());
                self.space.canonicalize(&mut p);
                p
            })
            .collect();
        ParticleMeasure::new(self.space.clone(), points, weights)?.normalize()
    }

    /// Monte-Carlo estimate of the integral of the density over its support
    /// (exactly 1 for the uniform rule).
    pub fn normalization_estimate(&self, n: usize, seed: u64) -> Result<f64> {
        self.validate()?;
        match &self.rule {
            DensityRule::Uniform => Ok(1.0),
            DensityRule::Weighted { f, .. } => {
                let mut rng = stream_rng(seed, u64::MAX);
                let mean = (0..n).map(|_| f(&self.support.draw(&mut rng))).sum::<f64>() / n as f64;
                Ok(mean * self.support.volume())
            }
        }
    }
}
