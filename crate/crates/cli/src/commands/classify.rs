//! `classify`: basin, attracting and correlation series with threshold verdicts.

use num_rational::BigRational;

use ergokit::classify::{
    attracting_test, basin_test, basin_test_exact, classical_correlation_detailed, generic_rational_point, geometric_grid,
    operational_correlation, BirkhoffOptions, CorrelationSeries, SeriesRecord,
};
use ergokit::numeric::split_seed;
use ergokit::systems::build_exact;
use ergokit::{ParticleMeasure, ProbeConfig, SystemSpec, TestFunction, TimeKind};

use super::{attractor, cell, check_times, neighbourhood, point_for, system, Outputs, Table};
use crate::config::RunConfig;
use crate::CliError;

/// Whether the configured system can be evolved over the rationals.
fn exact_capable(cfg: &RunConfig, sys: &SystemSpec<f64>) -> Result<bool, CliError> {
    Ok(sys.time_kind() == TimeKind::Discrete && (sys.id() != "identity" || cfg.zoo_params()?.identity_dim <= 1))
}

fn last_periodic_axis(sys: &SystemSpec<f64>) -> Option<usize> {
    (0..sys.space().dim()).rev().find(|&i| sys.space().is_periodic(i))
}

fn abs_series(s: &SeriesRecord<f64>) -> Result<SeriesRecord<f64>, CliError> {
    Ok(SeriesRecord::new(s.label(), s.times().to_vec(), s.values().iter().map(|v| v.abs()).collect())?)
}

fn stderr_series(c: &CorrelationSeries<f64>) -> Result<SeriesRecord<f64>, CliError> {
    Ok(SeriesRecord::new(format!("{} stderr", c.series.label()), c.series.times().to_vec(), c.stderr.clone())?)
}

struct Row {
    experiment: &'static str,
    series: SeriesRecord<f64>,
    /// Verdict input (absolute values for correlations).
    judged: SeriesRecord<f64>,
    mc_ok: Option<bool>,
}

pub fn run(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let sys = system(cfg)?;
    let id = sys.id().to_string();
    let a = attractor(&sys)?;
    let seed = cfg.u64("seed")?;
    let theta = cfg.f64("theta")?;
    let sigma = cfg.f64("mc_sigma")?;
    let experiments = cfg.list_str("experiments");
    let probe = ProbeConfig { anchors_per_measure: cfg.usize("probe_anchors")?, seed, ..ProbeConfig::default() };
    let dim = sys.space().dim();

    // validate everything before computing
    let basin_x = cfg.list_f64("basin_x")?;
    let basin_x = if basin_x.is_empty() { None } else { Some(point_for(&sys, basin_x, "basin_x")?) };
    let mut t_grid = cfg.list_f64("t_grid")?;
    if t_grid.is_empty() {
        t_grid = geometric_grid(cfg.f64("t_max")?);
    }
    check_times(&sys, &t_grid, "t_grid")?;
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Config("t_grid must be strictly increasing".into()));
    }
    let g1_axis = cfg.usize("g1_axis")?;
    let g2_axis = match cfg.opt_usize("g2_axis")? {
        Some(i) => i,
        None => last_periodic_axis(&sys).unwrap_or(0),
    };
    if g1_axis >= dim || g2_axis >= dim {
        return Err(CliError::Config(format!("observable axes must be < {dim} for '{id}'")));
    }
    let exact = exact_capable(cfg, &sys)?;
    let basin_t_max = cfg.f64("basin_t_max")?;
    let basin_grid = geometric_grid(if exact { basin_t_max.floor() } else { basin_t_max });
    if basin_grid.last().is_some_and(|t| *t < 1.0) {
        return Err(CliError::Config("basin_t_max must be >= 1".into()));
    }

    let mu_ref: ParticleMeasure<f64> = a.quadrature(cfg.usize("n_ref")?)?;
    let u = neighbourhood(cfg, &id)?;
    let mut rows = Vec::new();
    let mut out = Outputs::default();

    if experiments.iter().any(|e| e == "basin") {
        let x = match basin_x {
            Some(x) => x,
            None => a.sample(1, split_seed(seed, 2))?.points()[0].clone(),
        };
        let s = if exact {
            let flow = build_exact::<BigRational>(&id)?;
            let grid: Vec<u64> = basin_grid.iter().map(|t| *t as u64).collect();
            basin_test_exact(flow.as_ref(), &generic_rational_point(&x), &mu_ref, &grid, &probe)?
        } else {
            let opts = BirkhoffOptions { burn_in: 0.0, n_samples: cfg.usize("basin_samples")?, seed: split_seed(seed, 3), probe: probe.clone() };
            basin_test(&sys, &x, &mu_ref, &basin_grid, &opts)?
        };
        out.add_series("basin.csv", &s)?;
        rows.push(Row { experiment: "basin", judged: s.clone(), series: s, mc_ok: None });
    }
    if experiments.iter().any(|e| e == "attracting") {
        let s = attracting_test(&sys, &u, &mu_ref, &t_grid, cfg.usize("n_particles")?, split_seed(seed, 4), &probe)?;
        out.add_series("attracting.csv", &s)?;
        rows.push(Row { experiment: "attracting", judged: s.clone(), series: s, mc_ok: None });
    }
    let corr_grid: Vec<f64> = (0..=cfg.usize("corr_t_max")?).map(|k| k as f64).collect();
    let g1 = TestFunction::cosine(g1_axis, 1.0, 1.0);
    let g2 = TestFunction::cosine(g2_axis, 1.0, 1.0);
    let corr_n = cfg.usize("corr_n")?;
    let mut corr = |name: &'static str, c: CorrelationSeries<f64>, out: &mut Outputs| -> Result<(), CliError> {
        out.add_series(format!("{name}.csv"), &c.series)?;
        out.add_series(format!("{name}_stderr.csv"), &stderr_series(&c)?)?;
        let ok = c.series.values().iter().zip(&c.stderr).all(|(v, se)| v.abs() <= sigma * se);
        rows.push(Row { experiment: name, judged: abs_series(&c.series)?, series: c.series, mc_ok: Some(ok) });
        Ok(())
    };
    if experiments.iter().any(|e| e == "classical") {
        let mu = a.sample(corr_n, split_seed(seed, 5))?;
        corr("classical", classical_correlation_detailed(&sys, &mu, &g1, &g2, &corr_grid)?, &mut out)?;
    }
    if experiments.iter().any(|e| e == "operational") {
        let c = operational_correlation(&sys, &u, &mu_ref, &g1, &g2, &corr_grid, corr_n, split_seed(seed, 6))?;
        corr("operational", c, &mut out)?;
    }

    let mut table = Table::new(&["experiment", "label", "converged", "window_median", "theta", "max_abs", "mc_within_sigma"]);
    for r in &rows {
        let v = r.judged.verdict(theta);
        table.push(vec![
            r.experiment.to_string(),
            cell(r.series.label()),
            v.converged.to_string(),
            v.window_median.to_string(),
            v.theta.to_string(),
            r.series.max_abs().to_string(),
            r.mc_ok.map_or(String::new(), |b| b.to_string()),
        ]);
    }
    out.add("summary.csv", table.to_bytes());
    Ok(out)
}
