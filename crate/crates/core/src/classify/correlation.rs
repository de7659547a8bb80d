use super::birkhoff::along_grid;
use super::series::{check_grid, SeriesRecord};
use crate::error::Result;
use crate::measure::{DensitySpec, ParticleMeasure, TestFunction};
use crate::numeric::det_map_sum;
use crate::scalar::Real;
use crate::systems::SystemSpec;

/// Correlation curve with the Monte-Carlo standard error of each value.
#[derive(Debug, Clone)]
pub struct CorrelationSeries<R> {
    pub series: SeriesRecord<R>,
    pub stderr: Vec<R>,
}

/// Weighted mean of `z` under `mu` and the standard error of that mean
/// (effective sample size `(sum w)^2 / sum w^2`).
fn weighted_mean_stderr<R: Real>(mu: &ParticleMeasure<R>, z: &[R]) -> (R, R) {
    let w = mu.weights();
    let n = w.len();
    let mass = det_map_sum(n, |i| w[i]);
    let mean = det_map_sum(n, |i| w[i] * z[i]) / mass;
    let var = det_map_sum(n, |i| w[i] * (z[i] - mean) * (z[i] - mean)) / mass;
    let n_eff = mass * mass / det_map_sum(n, |i| w[i] * w[i]);
    (mean, (var / n_eff).sqrt())
}

fn eval_all<R: Real>(mu: &ParticleMeasure<R>, g: &TestFunction<R>) -> Vec<R> {
    use rayon::prelude::*;
    mu.points().par_iter().map(|p| g.eval(p)).collect()
}

/// `t -> int g1 (g2 o f^t) dmu - int g1 dmu int g2 dmu` on the ensemble.
pub fn classical_correlation<R: Real>(
    sys: &SystemSpec<R>,
    mu: &ParticleMeasure<R>,
    g1: &TestFunction<R>,
    g2: &TestFunction<R>,
    t_grid: &[R],
) -> Result<SeriesRecord<R>> {
    Ok(classical_correlation_detailed(sys, mu, g1, g2, t_grid)?.series)
}

pub fn classical_correlation_detailed<R: Real>(
    sys: &SystemSpec<R>,
    mu: &ParticleMeasure<R>,
    g1: &TestFunction<R>,
    g2: &TestFunction<R>,
    t_grid: &[R],
) -> Result<CorrelationSeries<R>> {
    check_grid(t_grid)?;
    let a = eval_all(mu, g1);
    let (m1, _) = weighted_mean_stderr(mu, &a);
    let (m2, _) = weighted_mean_stderr(mu, &eval_all(mu, g2));
    let pairs = along_grid(sys, mu, t_grid, |_, pushed| {
        let h = eval_all(pushed, g2);
        let z: Vec<R> = a.iter().zip(&h).map(|(x, y)| *x * *y).collect();
        let (m, se) = weighted_mean_stderr(mu, &z);
        Ok((m - m1 * m2, se))
    })?;
    let (values, stderr) = pairs.into_iter().unzip();
    Ok(CorrelationSeries {
        series: SeriesRecord::new(format!("classical correlation {}", sys.id()), t_grid.to_vec(), values)?,
        stderr,
    })
}

/// `t -> int_U g1 (g2 o f^t) dm - int_U g1 dm int g2 dmu_ref`, with the
/// normalized reference volume on `U` realized by `n` samples.
#[allow(clippy::too_many_arguments)]
pub fn operational_correlation<R: Real>(
    sys: &SystemSpec<R>,
    u_density: &DensitySpec,
    mu_ref: &ParticleMeasure<R>,
    g1: &TestFunction<R>,
    g2: &TestFunction<R>,
    t_grid: &[R],
    n: usize,
    seed: u64,
) -> Result<CorrelationSeries<R>> {
    check_grid(t_grid)?;
    let m: ParticleMeasure<R> = u_density.sample(n, seed)?;
    let a = eval_all(&m, g1);
    let (m1, _) = weighted_mean_stderr(&m, &a);
    let (m2, _) = weighted_mean_stderr(mu_ref, &eval_all(mu_ref, g2));
    let pairs = along_grid(sys, &m, t_grid, |_, pushed| {
        let h = eval_all(pushed, g2);
        let z: Vec<R> = a.iter().zip(&h).map(|(x, y)| *x * *y).collect();
        let (mean, se) = weighted_mean_stderr(&m, &z);
        Ok((mean - m1 * m2, se))
    })?;
    let (values, stderr) = pairs.into_iter().unzip();
    Ok(CorrelationSeries {
        series: SeriesRecord::new(format!("operational correlation {}", sys.id()), t_grid.to_vec(), values)?,
        stderr,
    })
}
