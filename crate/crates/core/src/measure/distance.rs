//! Weak distances between particle measures.
//!
//! The bounded-Lipschitz distance is estimated from below by maximizing over
//! a finite family of bounded 1-Lipschitz probes anchored at particle
//! locations. On one-dimensional spaces of diameter at most 2 the BL and
//! Wasserstein-1 distances coincide and the latter is computed exactly.

use rayon::prelude::*;

use super::particle::ParticleMeasure;
use super::space::{Axis, MetricSpace, Point};
use crate::error::{Error, Result};
use crate::numeric::{pairwise_sum, split_seed, CHUNK};
use crate::scalar::Real;

/// Parameters of the deterministic probe family.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    /// Anchors taken from each measure (all particles if fewer).
    pub anchors_per_measure: usize,
    /// Cone radii.
    pub radii: Vec<f64>,
    /// Shifts the strided anchor selection.
    pub seed: u64,
    /// Use the exact W1 route on 1-D spaces with diameter <= 2.
    pub exact_1d: bool,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            anchors_per_measure: 64,
            radii: (-4..=2).map(|k| 2f64.powi(k)).collect(),
            seed: 0,
            exact_1d: true,
        }
    }
}

/// Fixed finite set of probes `g_{p,r}(x) = h max(0, 1 - d(x,p)/r) - h/2`
/// with `h = min(r, 2)`; each has sup-norm `<= 1` and Lipschitz constant `<= 1`.
#[derive(Debug, Clone)]
pub struct ProbeFamily<R> {
    space: MetricSpace,
    anchors: Vec<Point<R>>,
    radii: Vec<R>,
    sorted_radii: Vec<R>,
}

impl<R: Real> ProbeFamily<R> {
    /// Anchors drawn by strided selection from each measure independently,
    /// so the family does not depend on argument order.
    pub fn from_measures(measures: &[&ParticleMeasure<R>], cfg: &ProbeConfig) -> Result<Self> {
        let first = measures.first().ok_or(Error::EmptyMeasure)?;
        let space = first.space().clone();
        let mut anchors = Vec::new();
        let offset = (split_seed(cfg.seed, 0xA11C) >> 11) as f64 / (1u64 << 53) as f64;
        for m in measures {
            if *m.space() != space {
                return Err(Error::SpaceMismatch(space.id().into(), m.space().id().into()));
            }
            let n = m.len();
            let k = cfg.anchors_per_measure.max(1);
            if n <= k {
                anchors.extend(m.points().iter().cloned());
            } else {
                for j in 0..k {
                    let idx = (((j as f64 + offset) * n as f64 / k as f64) as usize).min(n - 1);
                    anchors.push(m.points()[idx].clone());
                }
            }
        }
        if cfg.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidArgument("probe radii must be positive and finite".into()));
        }
        let radii: Vec<R> = cfg.radii.iter().map(|r| R::c(*r)).collect();
        let mut sorted_radii = radii.clone();
        sorted_radii.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        sorted_radii.dedup();
        Ok(ProbeFamily { space, anchors, radii, sorted_radii })
    }

    pub fn len(&self) -> usize {
        self.anchors.len() * self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `int max(0, 1 - d(., anchor)/r) dm` for every radius. Each particle
    /// adds `w` and `w d` to the bucket of the first radius above `d`; the
    /// integral at `r_j` is then `sum_{k <= j} (W_k - S_k / r_j)`. Sums are
    /// serial within fixed chunks and pairwise across chunks.
    fn cone_sums(&self, m: &ParticleMeasure<R>, anchor: &Point<R>) -> Vec<R> {
        let sorted = &self.sorted_radii;
        let nr = sorted.len();
        let partial: Vec<Vec<R>> = m
            .points()
            .chunks(CHUNK)
            .zip(m.weights().chunks(CHUNK))
            .map(|(pc, wc)| {
                // [W_0..W_{nr-1}, S_0..S_{nr-1}]
                let mut acc = vec![R::zero(); 2 * nr];
                for (p, w) in pc.iter().zip(wc) {
                    let d = self.space.distance(p, anchor);
                    let k = sorted.partition_point(|r| *r <= d);
                    if k < nr {
                        acc[k] = acc[k] + *w;
                        acc[nr + k] = acc[nr + k] + *w * d;
                    }
                }
                acc
            })
            .collect();
        let total: Vec<R> = (0..2 * nr).map(|k| pairwise_sum(&partial.iter().map(|c| c[k]).collect::<Vec<R>>())).collect();
        let mut by_sorted = Vec::with_capacity(nr);
        let (mut cw, mut cs) = (R::zero(), R::zero());
        for (j, &r) in sorted.iter().enumerate() {
            cw = cw + total[j];
            cs = cs + total[nr + j];
            by_sorted.push((cw - cs / r).max(R::zero()));
        }
        self.radii.iter().map(|r| by_sorted[sorted.partition_point(|s| s < r)]).collect()
    }

    /// `max_r |h (a_r - b_r) - h/2 gap|` with `h = min(r, 2)`, for cone sums `a`, `b`.
    fn score(&self, a: &[R], b: &[R], mass_gap: R) -> R {
        let two = R::c(2.0);
        self.radii
            .iter()
            .zip(a.iter().zip(b))
            .map(|(&r, (&x, &y))| {
                let h = r.min(two);
                (h * (x - y) - h / two * mass_gap).abs()
            })
            .fold(R::zero(), R::max)
    }

    /// `max_g |int g dmu - int g dnu|` over the family.
    pub fn distance(&self, mu: &ParticleMeasure<R>, nu: &ParticleMeasure<R>) -> Result<R> {
        for m in [mu, nu] {
            if *m.space() != self.space {
                return Err(Error::SpaceMismatch(self.space.id().into(), m.space().id().into()));
            }
        }
        let mass_gap = mu.total_mass() - nu.total_mass();
        let best = self
            .anchors
            .par_iter()
            .map(|a| self.score(&self.cone_sums(mu, a), &self.cone_sums(nu, a), mass_gap))
            .reduce(R::zero, R::max);
        Ok(best)
    }
}

/// `bl_distance(., mu)` against a fixed reference `mu`: the reference's
/// anchors and its cone sums there are computed once. Results are
/// bit-identical to [`bl_distance`].
pub struct BlReference<'a, R: Real> {
    mu: &'a ParticleMeasure<R>,
    cfg: ProbeConfig,
    /// `None` on the exact 1-D route.
    cached: Option<(ProbeFamily<R>, Vec<Vec<R>>)>,
}

impl<'a, R: Real> BlReference<'a, R> {
    pub fn new(mu: &'a ParticleMeasure<R>, cfg: &ProbeConfig) -> Result<Self> {
        let cached = if exact_route(mu.space(), cfg) {
            None
        } else {
            let fam = ProbeFamily::from_measures(&[mu], cfg)?;
            let sums = fam.anchors.par_iter().map(|a| fam.cone_sums(mu, a)).collect();
            Some((fam, sums))
        };
        Ok(BlReference { mu, cfg: cfg.clone(), cached })
    }

    /// Same value as `bl_distance(nu, mu)`.
    pub fn distance(&self, nu: &ParticleMeasure<R>) -> Result<R> {
        if nu.space() != self.mu.space() {
            return Err(Error::SpaceMismatch(nu.space().id().into(), self.mu.space().id().into()));
        }
        let Some((fam, mu_sums)) = &self.cached else {
            return wasserstein_1d(nu, self.mu);
        };
        let own = ProbeFamily::from_measures(&[nu], &self.cfg)?;
        let gap = nu.total_mass() - self.mu.total_mass();
        let at_nu = own
            .anchors
            .par_iter()
            .map(|a| fam.score(&fam.cone_sums(nu, a), &fam.cone_sums(self.mu, a), gap))
            .reduce(R::zero, R::max);
        let at_mu = fam.anchors.par_iter().zip(mu_sums).map(|(a, sm)| fam.score(&fam.cone_sums(nu, a), sm, gap)).reduce(R::zero, R::max);
        Ok(at_nu.max(at_mu))
    }
}

fn exact_route(space: &MetricSpace, cfg: &ProbeConfig) -> bool {
    cfg.exact_1d && space.dim() == 1 && space.diameter() <= 2.0
}

/// Bounded-Lipschitz distance (lower-bound estimate, exact on small 1-D spaces).
pub fn bl_distance<R: Real>(mu: &ParticleMeasure<R>, nu: &ParticleMeasure<R>, cfg: &ProbeConfig) -> Result<R> {
    if mu.space() != nu.space() {
        return Err(Error::SpaceMismatch(mu.space().id().into(), nu.space().id().into()));
    }
    if exact_route(mu.space(), cfg) {
        return wasserstein_1d(mu, nu);
    }
    ProbeFamily::from_measures(&[mu, nu], cfg)?.distance(mu, nu)
}

fn sorted_events<R: Real>(mu: &ParticleMeasure<R>, nu: &ParticleMeasure<R>) -> Vec<(R, R)> {
    let mut ev: Vec<(R, R)> = mu
        .iter()
        .map(|(p, w)| (p[0], w))
        .chain(nu.iter().map(|(p, w)| (p[0], -w)))
        .collect();
    ev.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

/// Exact Wasserstein-1 distance on a line, segment or circle.
///
/// Circle: `min_a int_0^1 |F(x) - G(x) - a| dx`, minimized at a weighted
/// median of the CDF difference.
pub fn wasserstein_1d<R: Real>(mu: &ParticleMeasure<R>, nu: &ParticleMeasure<R>) -> Result<R> {
    if mu.space() != nu.space() {
        return Err(Error::SpaceMismatch(mu.space().id().into(), nu.space().id().into()));
    }
    if mu.space().dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: mu.space().dim() });
    }
    let (mm, mn) = (mu.total_mass(), nu.total_mass());
    if (mm - mn).abs() > R::c(1e-9) * mm.max(mn) {
        return Err(Error::InvalidArgument("W1 needs equal total masses".into()));
    }
    let ev = sorted_events(mu, nu);
    match mu.space().axes()[0] {
        Axis::Periodic => {
            let mut pieces: Vec<(R, R)> = Vec::with_capacity(ev.len() + 1);
            pieces.push((R::zero(), ev[0].0));
            let mut cum = R::zero();
            for k in 0..ev.len() {
                cum = cum + ev[k].1;
                let next = if k + 1 < ev.len() { ev[k + 1].0 } else { R::one() };
                pieces.push((cum, next - ev[k].0));
            }
            let mut by_level = pieces.clone();
            by_level.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
            let half = R::c(0.5);
            let mut acc = R::zero();
            let mut level = by_level[0].0;
            for (d, len) in &by_level {
                acc = acc + *len;
                if acc >= half {
                    level = *d;
                    break;
                }
            }
            let terms: Vec<R> = pieces.iter().map(|(d, len)| (*d - level).abs() * *len).collect();
            Ok(pairwise_sum(&terms))
        }
        _ => {
            let mut cum = R::zero();
            let mut terms = Vec::with_capacity(ev.len());
            for k in 0..ev.len() - 1 {
                cum = cum + ev[k].1;
                terms.push(cum.abs() * (ev[k + 1].0 - ev[k].0));
            }
            Ok(pairwise_sum(&terms))
        }
    }
}
