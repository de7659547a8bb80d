use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use super::series::{check_grid, SeriesRecord};
use crate::error::{Error, Result};
use crate::measure::{BlReference, DensitySpec, ParticleMeasure, Point, ProbeConfig};
use crate::numeric::stream_rng;
use crate::scalar::{Real, Scalar};
use crate::systems::{Semiflow, SystemSpec, TimeKind};

/// Options shared by the Birkhoff-average estimators.
#[derive(Debug, Clone)]
pub struct BirkhoffOptions {
    /// Averaging starts here.
    pub burn_in: f64,
    /// Time samples for continuous systems (discrete systems use every integer time).
    pub n_samples: usize,
    /// Seeds the per-cell time jitter of continuous systems.
    pub seed: u64,
    pub probe: ProbeConfig,
}

impl Default for BirkhoffOptions {
    fn default() -> Self {
        BirkhoffOptions { burn_in: 0.0, n_samples: 20_000, seed: 0, probe: ProbeConfig::default() }
    }
}

fn integer_times(t_end: f64, burn_in: f64) -> Result<(u64, u64)> {
    let lo = burn_in.ceil().max(0.0) as u64;
    let hi = t_end.ceil() as u64;
    if hi <= lo {
        return Err(Error::InvalidArgument(format!("no integer times in [{burn_in}, {t_end})")));
    }
    Ok((lo, hi))
}

/// Empirical time average `(1/(T-b)) int_b^T delta_{f^t x} dt` as equal-weight particles.
///
/// Discrete systems use all integers in `[burn_in, T)`. Continuous systems
/// split `[burn_in, T]` into `n_samples` equal cells and take one seeded
/// uniformly jittered time per cell, which avoids aliasing against periodic
/// orbits.
pub fn birkhoff_measure<R: Real>(
    sys: &SystemSpec<R>,
    x: &Point<R>,
    t_end: R,
    burn_in: R,
    n_samples: usize,
    seed: u64,
) -> Result<ParticleMeasure<R>> {
    if !(burn_in >= R::zero() && t_end > burn_in) {
        return Err(Error::InvalidArgument("need T > burn_in >= 0".into()));
    }
    let times: Vec<R> = match sys.time_kind() {
        TimeKind::Discrete => {
            let (lo, hi) = integer_times(t_end.to_f64().unwrap_or(0.0), burn_in.to_f64().unwrap_or(0.0))?;
            (lo..hi).map(|k| R::c(k as f64)).collect()
        }
        TimeKind::Continuous => {
            if n_samples == 0 {
                return Err(Error::InvalidArgument("n_samples must be positive".into()));
            }
            let h = (t_end - burn_in) / R::c(n_samples as f64);
            let mut rng = stream_rng(seed, 0);
            (0..n_samples).map(|k| burn_in + (R::c(k as f64) + R::c(rng.gen::<f64>())) * h).collect()
        }
    };
    let points = sys.trajectory(x, &times)?;
    ParticleMeasure::uniform(sys.space().clone(), points)
}

/// Birkhoff measure of a discrete map evolved in exact arithmetic, converted
/// to floating point at the end.
pub fn birkhoff_measure_exact<S: Scalar, R: Real>(
    flow: &dyn Semiflow<S>,
    x: &Point<S>,
    t_end: u64,
    burn_in: u64,
) -> Result<ParticleMeasure<R>> {
    if flow.time_kind() != TimeKind::Discrete {
        return Err(Error::InvalidArgument("exact Birkhoff averages need a discrete map".into()));
    }
    let (lo, hi) = integer_times(t_end as f64, burn_in as f64)?;
    let times: Vec<S> = (lo..hi).map(|k| S::from_u64(k).expect("integer time")).collect();
    let points = flow.trajectory(x, &times)?.iter().map(Point::to_real).collect();
    ParticleMeasure::uniform(flow.space().clone(), points)
}

/// Prime with 2 as a primitive root. Float points are dyadic rationals, which
/// the doubling-type maps send to 0 within about 53 steps; a point with this
/// denominator stays on a periodic orbit of length up to `p - 1` instead.
pub const GENERIC_DENOMINATOR: i64 = 1_000_000_021;

/// Nearest point with coordinates `k / GENERIC_DENOMINATOR`.
pub fn generic_rational_point(x: &Point<f64>) -> Point<BigRational> {
    let p = GENERIC_DENOMINATOR;
    Point(
        x.coords()
            .iter()
            .map(|v| BigRational::new(BigInt::from((v * p as f64).round() as i64), BigInt::from(p)))
            .collect(),
    )
}

/// [`basin_test`] for a discrete map evolved exactly: one orbit up to the
/// largest grid time, prefix averages for the others.
pub fn basin_test_exact<S: Scalar, R: Real>(
    flow: &dyn Semiflow<S>,
    x: &Point<S>,
    mu_ref: &ParticleMeasure<R>,
    t_grid: &[u64],
    probe: &ProbeConfig,
) -> Result<SeriesRecord<R>> {
    if flow.time_kind() != TimeKind::Discrete {
        return Err(Error::InvalidArgument("exact basin test needs a discrete map".into()));
    }
    if t_grid.first() == Some(&0) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("exact basin grid must be positive and increasing".into()));
    }
    let t_end = t_grid.last().copied().unwrap_or(0);
    let times: Vec<S> = (0..t_end).map(|k| S::from_u64(k).expect("integer time")).collect();
    let orbit: Vec<Point<R>> = flow.trajectory(x, &times)?.iter().map(Point::to_real).collect();
    let reference = BlReference::new(mu_ref, probe)?;
    let values = t_grid
        .iter()
        .map(|&t| {
            let b = ParticleMeasure::uniform(flow.space().clone(), orbit[..t as usize].to_vec())?;
            reference.distance(&b)
        })
        .collect::<Result<Vec<R>>>()?;
    let grid = t_grid.iter().map(|t| R::c(*t as f64)).collect();
    SeriesRecord::new(format!("basin {} exact", flow.id()), grid, values)
}

/// `T -> bl_distance(birkhoff_measure(x, T), mu_ref)` over `t_grid`.
pub fn basin_test<R: Real>(
    sys: &SystemSpec<R>,
    x: &Point<R>,
    mu_ref: &ParticleMeasure<R>,
    t_grid: &[R],
    opts: &BirkhoffOptions,
) -> Result<SeriesRecord<R>> {
    check_grid(t_grid)?;
    let burn_in = R::c(opts.burn_in);
    let reference = BlReference::new(mu_ref, &opts.probe)?;
    let values = t_grid
        .iter()
        .map(|&t| {
            let b = birkhoff_measure(sys, x, t, burn_in, opts.n_samples, opts.seed)?;
            reference.distance(&b)
        })
        .collect::<Result<Vec<R>>>()?;
    SeriesRecord::new(format!("basin {} x={}", sys.id(), x), t_grid.to_vec(), values)
}

/// Calls `f(t, f^t nu)` for each `t` of a nondecreasing grid, evolving incrementally.
pub fn along_grid<R: Real, T, F>(sys: &SystemSpec<R>, nu: &ParticleMeasure<R>, t_grid: &[R], mut f: F) -> Result<Vec<T>>
where
    F: FnMut(R, &ParticleMeasure<R>) -> Result<T>,
{
    if t_grid.first().is_some_and(|t| *t < R::zero()) {
        return Err(Error::NegativeTime(t_grid[0].to_f64().unwrap_or(f64::NAN)));
    }
    let mut cur = nu.clone();
    let mut prev = R::zero();
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let dt = t - prev;
        if dt > R::zero() {
            cur = cur.try_pushforward(|p| sys.evolve(dt, p))?;
        }
        prev = t;
        out.push(f(t, &cur)?);
    }
    Ok(out)
}

/// `t -> bl_distance(f^t nu, mu_ref)` for `nu` sampled from `init`.
#[allow(clippy::too_many_arguments)]
pub fn attracting_test<R: Real>(
    sys: &SystemSpec<R>,
    init: &DensitySpec,
    mu_ref: &ParticleMeasure<R>,
    t_grid: &[R],
    n_particles: usize,
    seed: u64,
    probe: &ProbeConfig,
) -> Result<SeriesRecord<R>> {
    check_grid(t_grid)?;
    let nu: ParticleMeasure<R> = init.sample(n_particles, seed)?;
    attracting_test_from(sys, &nu, mu_ref, t_grid, probe)
}

/// [`attracting_test`] for an explicit initial ensemble.
pub fn attracting_test_from<R: Real>(
    sys: &SystemSpec<R>,
    nu: &ParticleMeasure<R>,
    mu_ref: &ParticleMeasure<R>,
    t_grid: &[R],
    probe: &ProbeConfig,
) -> Result<SeriesRecord<R>> {
    check_grid(t_grid)?;
    let reference = BlReference::new(mu_ref, probe)?;
    let values = along_grid(sys, nu, t_grid, |_, m| reference.distance(m))?;
    SeriesRecord::new(format!("attracting {}", sys.id()), t_grid.to_vec(), values)
}
