use std::io::{Read, Write};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measure::{DensityRule, DensitySpec, MetricSpace, Point, Support};
use crate::numeric::{split_seed, stream_rng, CHUNK};
use crate::scalar::Real;
use crate::systems::{Attractor, BowenContext, SystemSpec};

/// Minimum Monte-Carlo sample count accepted by the ratio estimators.
pub const MIN_MC: usize = 1000;

/// Uniform measure of total mass `mass` on a coordinate box (axes with
/// `lo == hi` pinned), able to draw proposals for measuring subsets of a
/// metric ball.
///
/// In local mode the proposal is the coordinate window `x +- r` on each free
/// axis (the whole axis range when the window is wider). Any subset of
/// `B_r(x)` lies inside that window, so `scale * (hits / n)` is an unbiased
/// estimate of its mass. Global mode draws from the whole box.
#[derive(Debug, Clone)]
pub struct UniformBoxSampler {
    space: MetricSpace,
    lo: Vec<f64>,
    hi: Vec<f64>,
    mass: f64,
    local: bool,
}

/// Proposal draws lying in the support, out of `n` total, and the factor
/// turning a hit fraction into a mass.
#[derive(Debug, Clone)]
pub struct Draws<R> {
    pub points: Vec<Point<R>>,
    pub n: usize,
    pub scale: f64,
}

impl UniformBoxSampler {
    pub fn new(space: MetricSpace, lo: Vec<f64>, hi: Vec<f64>, mass: f64, local: bool) -> Result<Self> {
        if lo.len() != space.dim() || hi.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), got: lo.len() });
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h)) || !(mass > 0.0) {
            return Err(Error::BadSupport);
        }
        Ok(UniformBoxSampler { space, lo, hi, mass, local })
    }

    /// From a uniform density on a box support.
    pub fn from_density(d: &DensitySpec, mass: f64, local: bool) -> Result<Self> {
        match (&d.support, &d.rule) {
            (Support::Box { lo, hi }, DensityRule::Uniform) => Self::new(d.space.clone(), lo.clone(), hi.clone(), mass, local),
            _ => Err(Error::InvalidArgument("box sampler needs a uniform box density".into())),
        }
    }

    pub fn local(mut self, local: bool) -> Self {
        self.local = local;
        self
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    fn support(&self) -> Support {
        Support::boxed(self.lo.clone(), self.hi.clone())
    }

    /// `n` proposals for subsets of `B_r(x)`, batch `k` on random stream `k`.
    pub fn draw<R: Real>(&self, x: &Point<R>, r: f64, n: usize, seed: u64) -> Draws<R> {
        let d = self.space.dim();
        let window: Vec<Option<(f64, f64)>> = (0..d)
            .map(|i| {
                let (l, h) = (self.lo[i], self.hi[i]);
                if h <= l {
                    return Some((l, l));
                }
                let xi = x[i].to_f64().unwrap_or(l);
                (self.local && 2.0 * r < h - l).then_some((xi - r, xi + r))
            })
            .collect();
        let mut scale = self.mass;
        for (i, win) in window.iter().enumerate() {
            let w = self.hi[i] - self.lo[i];
            if w > 0.0 {
                if let Some((a, b)) = *win {
                    scale *= (b - a) / w;
                }
            }
        }
        let support = self.support();
        let points = (0..n.div_ceil(CHUNK))
            .into_par_iter()
            .flat_map_iter(|b| {
                let mut rng = stream_rng(seed, b as u64);
                let count = CHUNK.min(n - b * CHUNK);
                let mut out = Vec::with_capacity(count);
                for _ in 0..count {
                    let c: Vec<R> = (0..d)
                        .map(|i| {
                            let (a, b) = window[i].unwrap_or((self.lo[i], self.hi[i]));
                            R::c(if b > a { rng.gen_range(a..b) } else { a })
                        })
                        .collect();
                    let mut p = Point(c);
                    self.space.canonicalize(&mut p);
                    if support.contains(&self.space, &p) {
                        out.push(p);
                    }
                }
                out
            })
            .collect();
        Draws { points, n, scale }
    }
}

/// Monte-Carlo estimate of `mu(B_delta^tau(x)) / m(B_{3 delta}^tau(x))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioEstimate<R> {
    /// `inf` when no denominator sample hit.
    pub ratio: R,
    pub numerator: R,
    pub denominator: R,
    pub numerator_hits: usize,
    pub denominator_hits: usize,
    /// Delta-method standard error of `ratio`.
    pub stderr: R,
}

impl<R: Real> RatioEstimate<R> {
    pub fn zero_denominator(&self) -> bool {
        self.denominator_hits == 0
    }
}

fn count_hits<R: Real>(ctx: &BowenContext<R>, orbit_x: &[Point<R>], ys: &[Point<R>], r: R) -> Result<usize> {
    let sys = ctx.system();
    let grid = ctx.grid();
    ys.par_iter()
        .map(|y| {
            // incremental orbit with early exit
            let mut cur = y.clone();
            let mut prev = R::zero();
            for (k, &t) in grid.iter().enumerate() {
                if t > prev {
                    cur = sys.evolve(t - prev, &cur)?;
                    prev = t;
                }
                if !(sys.distance(&orbit_x[k], &cur) < r) {
                    return Ok(0usize);
                }
            }
            Ok(1)
        })
        .collect::<Result<Vec<usize>>>()
        .map(|v| v.into_iter().sum())
}

/// Bowen-ball ratio `mu(B_delta^tau(x)) / m(B_{3 delta}^tau(x))`; numerator
/// and denominator use independent streams derived from `seed`.
pub fn bowen_ratio<R: Real>(
    ctx: &BowenContext<R>,
    mu: &UniformBoxSampler,
    m: &UniformBoxSampler,
    x: &Point<R>,
    delta: R,
    n_mc: usize,
    seed: u64,
) -> Result<RatioEstimate<R>> {
    if n_mc < MIN_MC {
        return Err(Error::InvalidArgument(format!("n_mc must be >= {MIN_MC}")));
    }
    if !(delta > R::zero()) {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    let orbit_x = ctx.orbit(x)?;
    let d = delta.to_f64().unwrap_or(0.0);
    let three = R::c(3.0) * delta;
    let dn = mu.draw::<R>(x, d, n_mc, split_seed(seed, 1));
    let dd = m.draw::<R>(x, 3.0 * d, n_mc, split_seed(seed, 2));
    let hn = count_hits(ctx, &orbit_x, &dn.points, delta)?;
    let hd = count_hits(ctx, &orbit_x, &dd.points, three)?;
    let n = R::c(n_mc as f64);
    let (pn, pd) = (R::c(hn as f64) / n, R::c(hd as f64) / n);
    let numerator = R::c(dn.scale) * pn;
    let denominator = R::c(dd.scale) * pd;
    if hd == 0 {
        return Ok(RatioEstimate {
            ratio: R::infinity(),
            numerator,
            denominator,
            numerator_hits: hn,
            denominator_hits: 0,
            stderr: R::infinity(),
        });
    }
    let ratio = numerator / denominator;
    let rel_d = (R::one() - pd) / (n * pd);
    let stderr = if hn == 0 {
        R::c(dn.scale) / (n * denominator)
    } else {
        ratio * ((R::one() - pn) / (n * pn) + rel_d).sqrt()
    };
    Ok(RatioEstimate { ratio, numerator, denominator, numerator_hits: hn, denominator_hits: hd, stderr })
}

/// One row of a ratio scan.
#[derive(Debug, Clone, PartialEq)]
pub struct CehypRow<R> {
    pub tau: R,
    /// Minimum finite ratio over centers (`inf` if every center hit a zero denominator).
    pub min_ratio: R,
    pub n_zero_denominators: usize,
    /// Fraction of denominator samples that landed in a Bowen ball, averaged over centers.
    pub coverage: R,
}

/// Minimum Bowen-ball ratio over `n_x` centers sampled from `A`, for each
/// horizon. Each center reuses its random draws at every horizon.
#[allow(clippy::too_many_arguments)]
pub fn cehyp_scan<R: Real>(
    sys: &SystemSpec<R>,
    mu: &UniformBoxSampler,
    m: &UniformBoxSampler,
    a: &dyn Attractor<R>,
    delta: R,
    tau_list: &[R],
    n_x: usize,
    n_mc: usize,
    seed: u64,
) -> Result<Vec<CehypRow<R>>> {
    if n_x == 0 {
        return Err(Error::InvalidArgument("n_x must be positive".into()));
    }
    let centers = a.sample(n_x, split_seed(seed, 0xCE))?;
    tau_list
        .iter()
        .map(|&tau| {
            let ctx = BowenContext::new(sys.clone(), tau, Some(delta))?;
            let est = centers
                .points()
                .iter()
                .enumerate()
                .map(|(j, x)| bowen_ratio(&ctx, mu, m, x, delta, n_mc, split_seed(seed, j as u64)))
                .collect::<Result<Vec<_>>>()?;
            let zero = est.iter().filter(|e| e.zero_denominator()).count();
            let min_ratio = est.iter().filter(|e| !e.zero_denominator()).fold(R::infinity(), |acc, e| acc.min(e.ratio));
            let coverage =
                est.iter().map(|e| R::c(e.denominator_hits as f64 / n_mc as f64)).fold(R::zero(), |s, v| s + v) / R::c(n_x as f64);
            Ok(CehypRow { tau, min_ratio, n_zero_denominators: zero, coverage })
        })
        .collect()
}

/// CSV `tau,min_ratio,n_zero_denominators`.
pub fn write_cehyp_csv<R: Real, W: Write>(rows: &[CehypRow<R>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["tau", "min_ratio", "n_zero_denominators"])?;
    for r in rows {
        w.write_record([r.tau.to_string(), r.min_ratio.to_string(), r.n_zero_denominators.to_string()])?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}

/// Reads `(tau, min_ratio, n_zero_denominators)` triples.
pub fn read_cehyp_csv<R: Real, Rd: Read>(input: Rd) -> Result<Vec<(R, R, usize)>> {
    let mut rd = csv::Reader::from_reader(input);
    if rd.headers()?.iter().collect::<Vec<_>>() != ["tau", "min_ratio", "n_zero_denominators"] {
        return Err(Error::Parse("expected header tau,min_ratio,n_zero_denominators".into()));
    }
    rd.records()
        .map(|rec| {
            let rec = rec?;
            let f = |i: usize| rec.get(i).and_then(|s| s.parse::<f64>().ok()).ok_or_else(|| Error::Parse("bad cehyp row".into()));
            let n = rec.get(2).and_then(|s| s.parse::<usize>().ok()).ok_or_else(|| Error::Parse("bad cehyp row".into()))?;
            Ok((R::c(f(0)?), R::c(f(1)?), n))
        })
        .collect()
}
