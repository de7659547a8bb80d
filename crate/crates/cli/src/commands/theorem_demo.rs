//! `theorem-demo`: sample `nu` near the attractor, wait for orbit tracking to
//! settle, coarse-grain against the candidate measure on a Bowen cover and
//! compare integrals of a Lipschitz probe along the three evolutions.

use rayon::prelude::*;
use serde_json::json;

use ergokit::classify::{along_grid, orbit_track_search, OrbitTrackOptions, SeriesRecord};
use ergokit::coarse::{approx_error_check, cehyp_scan, coarse_grain_detailed, greedy_bisep, write_cehyp_csv, UniformBoxSampler};
use ergokit::numeric::split_seed;
use ergokit::systems::Attractor;
use ergokit::{BowenContext, ParticleMeasure, Point, TestFunction, TimeKind};

use super::{attractor, neighbourhood, seeded_permutation, system, Outputs, Table};
use crate::config::RunConfig;
use crate::CliError;

/// Default probe: a tent of height 1/2 and slope 1 at an attractor point.
pub fn default_probe(a: &dyn Attractor<f64>, seed: u64) -> Result<TestFunction<f64>, CliError> {
    let center = if a.param_dim() > 0 { a.point_at(&vec![0.3; a.param_dim()]) } else { a.sample(1, seed)?.points()[0].clone() };
    Ok(TestFunction::cone(a.space().clone(), center, 0.5, 1.0))
}

/// Mean of `g` under `m` and the standard error of that mean.
fn mean_stderr(m: &ParticleMeasure<f64>, g: &TestFunction<f64>) -> (f64, f64) {
    let mean = m.integrate(g);
    let var = m.integrate_fn(|p| (g.eval(p) - mean).powi(2)) / m.total_mass();
    let w = m.weights();
    let mass: f64 = ergokit::numeric::det_sum(w);
    let sq: Vec<f64> = w.iter().map(|x| x * x).collect();
    let n_eff = mass * mass / ergokit::numeric::det_sum(&sq);
    (mean, (var / n_eff).sqrt())
}

fn fmt(v: f64) -> String {
    v.to_string()
}

pub fn run(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let sys = system(cfg)?;
    let id = sys.id().to_string();
    let a = attractor(&sys)?;
    let seed = cfg.u64("seed")?;
    let eps = cfg.f64("eps")?;
    let delta = cfg.opt_f64("delta")?.unwrap_or(0.99 * eps / 6.0);
    let tau = cfg.f64("tau")?;
    let sigma = cfg.f64("mc_sigma")?;
    let settle_after = cfg.f64("settle_after")?;
    let t_max = cfg.usize("t_max")?;
    let tau_list = cfg.list_f64("tau_list")?;
    let discrete = sys.time_kind() == TimeKind::Discrete;
    super::check_times(&sys, &[tau], "tau")?;
    super::check_times(&sys, &tau_list, "tau_list")?;
    let u = neighbourhood(cfg, &id)?;
    let mut out = Outputs::default();

    // 1. initial law
    let nu: ParticleMeasure<f64> = u.sample(cfg.usize("n_particles")?, split_seed(seed, 1))?;

    // 2. settle time from orbit tracking at accuracy delta
    let n_track = cfg.usize("n_track")?.min(nu.len());
    let opts = OrbitTrackOptions::default();
    let track_t_max = cfg.f64("track_t_max")?;
    let track_n = cfg.usize("track_candidates")?;
    let tracks = (0..n_track)
        .into_par_iter()
        .map(|j| orbit_track_search(&sys, &nu.points()[j], a.as_ref(), delta, track_t_max, track_n, split_seed(seed, 100 + j as u64), &opts))
        .collect::<Result<Vec<_>, _>>()?;
    let mut tracking = Table::new(&["particle", "settle_time", "sup_distance", "candidates_tried", "refine_evaluations"]);
    for (j, r) in tracks.iter().enumerate() {
        tracking.push(vec![
            j.to_string(),
            fmt(r.settle_time),
            fmt(r.sup_distance),
            r.candidates_tried.to_string(),
            r.refine_evaluations.to_string(),
        ]);
    }
    out.add("tracking.csv", tracking.to_bytes());
    if let Some(j) = tracks.iter().position(|r| !r.tracked()) {
        out.fail(format!("orbit tracking failed for particle {j} at accuracy {delta} within T_max = {track_t_max}"));
        return Ok(out);
    }
    let mut t_settle = tracks.iter().map(|r| r.settle_time).fold(0.0, f64::max);
    if discrete {
        t_settle = t_settle.ceil();
    }
    let nu_t = nu.try_pushforward(|p| sys.evolve(t_settle, p))?;

    // 3. cover of the attractor near f^T nu
    let ctx = BowenContext::new(sys.clone(), tau, Some(delta))?;
    let mut pool: Vec<Point<f64>> = nu_t.points().iter().map(|p| a.project(p)).collect();
    pool.extend(a.sample(cfg.usize("n_candidates")?, split_seed(seed, 2))?.points().iter().cloned());
    let candidates: Vec<Point<f64>> = seeded_permutation(pool.len(), split_seed(seed, 3)).into_iter().map(|i| pool[i].clone()).collect();
    let cover = greedy_bisep(&ctx, &candidates, delta)?;
    let mut probes = candidates.clone();
    probes.extend(nu_t.points().iter().cloned());
    let report = cover.verify(&probes)?;
    let mut buf = Vec::new();
    cover.write_centers_csv(&mut buf)?;
    out.add("centers.csv", buf);
    out.add_json("cover.json", &super::cover::sidecar(&id, &cover, &report))?;
    if !report.ok() {
        out.fail(format!(
            "cover invariant failed: {} separation and {} coverage violations",
            report.separation_violations, report.coverage_violations
        ));
        return Ok(out);
    }

    // 4. coarse-graining against samples of the candidate measure
    let mu: ParticleMeasure<f64> = a.sample(cfg.usize("n_mu")?, split_seed(seed, 4))?;
    let (p, cg) = coarse_grain_detailed(&nu_t, &mu, &cover).map_err(|e| CliError::Runtime(format!("coarse-graining: {e}")))?;
    out.add_particles("coarse.csv", &p)?;

    // 5. comparison along t
    let g = default_probe(a.as_ref(), split_seed(seed, 5))?;
    let (mu_mean, mu_se) = mean_stderr(&mu, &g);
    let grid: Vec<f64> = (0..=t_max).map(|k| k as f64).collect();
    let nu_vals = along_grid(&sys, &nu_t, &grid, |_, m| Ok(mean_stderr(m, &g)))?;
    let p_vals = along_grid(&sys, &p, &grid, |_, m| Ok(m.integrate(&g)))?;
    let mut comparison = Table::new(&["t", "pushed_nu", "pushed_coarse", "mu", "gap_coarse", "gap_mu", "stderr"]);
    let mut worst: Option<(f64, f64, f64)> = None;
    let (mut gap_c, mut gap_m) = (Vec::new(), Vec::new());
    for ((t, (a_nu, se_nu)), b) in grid.iter().zip(&nu_vals).zip(&p_vals) {
        let se = (se_nu * se_nu + mu_se * mu_se).sqrt();
        let (dc, dm) = ((a_nu - b).abs(), (a_nu - mu_mean).abs());
        gap_c.push(dc);
        gap_m.push(dm);
        comparison.push([*t, *a_nu, *b, mu_mean, dc, dm, se].iter().map(|v| fmt(*v)).collect());
        if *t >= settle_after && dm > eps + sigma * se && worst.is_none_or(|w| dm - eps - sigma * se > w.1 - eps - sigma * w.2) {
            worst = Some((*t, dm, se));
        }
    }
    out.add("comparison.csv", comparison.to_bytes());
    out.add_series("gap_coarse.csv", &SeriesRecord::new("|int g d(f^(T+t) nu) - int g d(f^t P)|", grid.clone(), gap_c)?)?;
    out.add_series("gap_mu.csv", &SeriesRecord::new("|int g d(f^(T+t) nu) - int g dmu|", grid.clone(), gap_m)?)?;

    // 6. lemma check at t in {0, tau/2, tau}
    let mut lemma = Vec::new();
    for t in [0.0, ctx.half_time(), tau] {
        let (lhs, ok) = approx_error_check(&nu_t, &mu, &cover, &g, t)?;
        lemma.push(json!({ "t": t, "lhs": lhs, "bound": 6.0 * delta, "ok": ok }));
        if !ok {
            out.fail(format!("coarse-grain error {lhs} at t = {t} is not below 6 delta = {}", 6.0 * delta));
        }
    }

    // 7. Bowen-ratio scan
    let cehyp = match a.density() {
        Some(d) => {
            let mu_s = UniformBoxSampler::from_density(d, 1.0, true)?;
            let m_s = UniformBoxSampler::from_density(&u, u.support.volume(), true)?;
            let rows = cehyp_scan(&sys, &mu_s, &m_s, a.as_ref(), delta, &tau_list, cfg.usize("n_x")?, cfg.usize("n_mc")?, split_seed(seed, 6))?;
            let mut buf = Vec::new();
            write_cehyp_csv(&rows, &mut buf)?;
            out.add("cehyp.csv", buf);
            let floor = rows.iter().map(|r| r.min_ratio).fold(f64::INFINITY, f64::min);
            let zeros: usize = rows.iter().map(|r| r.n_zero_denominators).sum();
            if !(floor > 0.0) || zeros > 0 {
                out.fail(format!("Bowen-ratio scan has floor {floor} with {zeros} zero denominators"));
            }
            json!({ "min_ratio": floor, "zero_denominators": zeros })
        }
        None => json!(null),
    };

    if let Some((t, dm, se)) = worst {
        out.fail(format!("conclusion fails at t = {t}: gap {dm} exceeds eps + {sigma} stderr = {}", eps + sigma * se));
    }
    let summary = json!({
        "system": id,
        "eps": eps,
        "delta": delta,
        "tau": tau,
        "settle_time": t_settle,
        "n_centers": cover.len(),
        "cover": {
            "min_separation": report.min_separation,
            "max_probe_distance": report.max_probe_distance,
            "separation_violations": report.separation_violations,
            "coverage_violations": report.coverage_violations,
        },
        "coarse_mass": p.total_mass(),
        "density_ratio": cg.density_ratio,
        "lemma_checks": lemma,
        "mu_integral": mu_mean,
        "settle_after": settle_after,
        "conclusion_holds": worst.is_none(),
        "cehyp": cehyp,
    });
    out.add_json("summary.json", &summary)?;
    Ok(out)
}
