//! `counterexample`: checks on the skew-product flow over a linear torus flow.

use std::sync::Arc;

use serde_json::json;

use ergokit::classify::{concentration_bound, concentration_bound_raw, concentration_profile, geometric_grid, SeriesRecord};
use ergokit::measure::wasserstein_1d;
use ergokit::numeric::split_seed;
use ergokit::systems::{b2, b2_prime, build_system, default_neighbourhood, integrate_trajectory, CounterexampleParams, LinearTorusFlow, ZooParams};
use ergokit::{MetricSpace, ParticleMeasure, Point};

use super::{Outputs, Table};
use crate::config::RunConfig;
use crate::CliError;

/// Reference evaluation of the concentration bound (`c = 2`, `eps/M = 1`, `T = 10^6`).
pub const REFERENCE_BOUND_T: f64 = 1e6;

/// Tolerance added to the closed-form bound when comparing with a quadrature
/// of `n` midpoint nodes.
pub fn quadrature_tolerance(n: usize) -> f64 {
    2.0 / n as f64
}

fn grid_times(t_max: f64, h: f64) -> Vec<f64> {
    let n = ((t_max / h).round() as usize).max(1);
    (0..=n).map(|k| t_max * k as f64 / n as f64).collect()
}

pub fn run(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let seed = cfg.u64("seed")?;
    let zp = ZooParams { field_grid: cfg.usize("field_grid")?, ..ZooParams::default() };
    let base_dim = zp.base_omega.len();
    let base_x = cfg.list_f64("base_x")?;
    if base_x.len() != base_dim {
        return Err(CliError::Config(format!("base_x needs {base_dim} coordinates")));
    }
    let y0 = cfg.f64("y0")?;
    if y0 == 0.0 {
        return Err(CliError::Config("y0 must be nonzero for the concentration outputs".into()));
    }
    let y0_list = cfg.list_f64("y0_list")?;
    let conc_t = cfg.list_f64("concentration_t")?;
    if conc_t.iter().any(|t| *t <= 0.0) || conc_t.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Config("concentration_t must be positive and increasing".into()));
    }
    let sys = build_system::<f64>("counterexample", &zp)?;
    let mut out = Outputs::default();

    // (a) closed form against RK4
    let times = grid_times(cfg.f64("t_max")?, cfg.f64("grid")?);
    let step = cfg.f64("step")?;
    let mut disc_summary = Vec::new();
    for (k, y) in y0_list.iter().enumerate() {
        let mut c = base_x.clone();
        c.push(*y);
        let x = Point(c);
        let exact = sys.trajectory(&x, &times)?;
        let numeric = integrate_trajectory(sys.flow().as_ref(), &x, &times, step)?;
        let d: Vec<f64> = exact.iter().zip(&numeric).map(|(a, b)| sys.distance(a, b)).collect();
        let s = SeriesRecord::new(format!("closed form vs RK4 y0={y}"), times.clone(), d)?;
        disc_summary.push(json!({ "y0": y, "max_discrepancy": s.max_abs() }));
        out.add_series(format!("discrepancy_{k}.csv"), &s)?;
        // fiber coordinate of the closed form, for plotting
        let fiber: Vec<f64> = exact.iter().map(|p| p[base_dim]).collect();
        out.add_series(format!("fiber_{k}.csv"), &SeriesRecord::new(format!("fiber y0={y}"), times.clone(), fiber)?)?;
    }

    // (b) b2' near 0
    let r = cfg.f64("b2_range")?;
    let n = cfg.usize("b2_points")?.max(2);
    let mut prof = Table::new(&["y", "b2", "b2_prime"]);
    let (mut ys, mut vals) = (Vec::new(), Vec::new());
    for k in 0..n {
        let y = -r + 2.0 * r * k as f64 / (n - 1) as f64;
        let (v, dv) = if y == 0.0 { (0.0, 0.0) } else { (b2(y)?, b2_prime(y)?) };
        prof.push(vec![y.to_string(), v.to_string(), dv.to_string()]);
        ys.push(y);
        vals.push(dv);
    }
    out.add("b2_profile.csv", prof.to_bytes());
    out.add_series("b2_prime.csv", &SeriesRecord::new("b2'(y)", ys, vals)?)?;

    // (c) concentration profile against the closed-form bound
    let base = Arc::new(LinearTorusFlow::new(zp.base_omega.clone()));
    let params = CounterexampleParams::new(y0, base, zp.field_grid)?;
    let eps = cfg.f64("eps_over_m")? * params.field_bound();
    let qn = cfg.usize("quadrature_n")?;
    let profile = concentration_profile(&params, &Point(base_x.clone()), eps, &conc_t, qn)?;
    let bound = conc_t.iter().map(|t| concentration_bound(&params, eps, *t)).collect::<Result<Vec<f64>, _>>()?;
    let tol = quadrature_tolerance(qn);
    let mut conc = Table::new(&["T", "profile", "bound", "tolerance", "within"]);
    for ((t, p), b) in conc_t.iter().zip(profile.values()).zip(&bound) {
        let ok = *p <= b + tol;
        conc.push(vec![t.to_string(), p.to_string(), b.to_string(), tol.to_string(), ok.to_string()]);
        if !ok {
            out.fail(format!("concentration profile {p} exceeds bound {b} + {tol} at T = {t}"));
        }
    }
    out.add("concentration.csv", conc.to_bytes());
    out.add_series("profile.csv", &profile)?;
    out.add_series("bound.csv", &SeriesRecord::new("concentration bound", conc_t.clone(), bound)?)?;

    // (d) fiber marginal of a pushed ensemble against delta_0
    let u = default_neighbourhood("counterexample", &zp)?;
    let nu: ParticleMeasure<f64> = u.sample(cfg.usize("fiber_n")?, split_seed(seed, 1))?;
    let fiber_grid = geometric_grid(cfg.f64("fiber_t_max")?);
    let line = MetricSpace::line();
    let dirac = ParticleMeasure::dirac(line.clone(), Point(vec![0.0]))?;
    let w1 = ergokit::classify::along_grid(&sys, &nu, &fiber_grid, |_, m| {
        let marginal = m.marginal(&[base_dim], line.clone())?;
        wasserstein_1d(&marginal, &dirac)
    })?;
    let decay = SeriesRecord::new("W1(fiber marginal, delta_0)", fiber_grid, w1)?;
    out.add_series("fiber_decay.csv", &decay)?;

    let summary = json!({
        "discrepancy": disc_summary,
        "b2_prime_near_zero_max_abs": b2_prime_near_zero()?,
        "field_bound": params.field_bound(),
        "c": params.c(),
        "eps": eps,
        "concentration_tolerance": tol,
        "reference_bound": { "c": 2.0, "eps_over_m": 1.0, "T": REFERENCE_BOUND_T, "value": concentration_bound_raw(2.0, 1.0, REFERENCE_BOUND_T) },
        "fiber_decay_final": decay.values().last(),
    });
    out.add_json("summary.json", &summary)?;
    Ok(out)
}

/// `max |b2'(y)|` over `y = +-10^-k`, `k = 4..=12`.
fn b2_prime_near_zero() -> Result<f64, CliError> {
    let mut m = 0.0f64;
    for k in 4..=12 {
        let y = 10f64.powi(-k);
        m = m.max(b2_prime(y)?.abs()).max(b2_prime(-y)?.abs());
    }
    Ok(m)
}
