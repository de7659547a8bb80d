//! `cover`: standalone greedy bi-separated cover of attractor samples.

use serde_json::{json, Value};

use ergokit::coarse::{greedy_bisep, CoverReport, CoverSpec};
use ergokit::numeric::split_seed;
use ergokit::BowenContext;

use super::{attractor, seeded_permutation, system, Outputs, Table};
use crate::config::RunConfig;
use crate::CliError;

/// JSON sidecar of a cover: Bowen grid, scales and verification results.
pub fn sidecar(system: &str, cover: &CoverSpec<f64>, report: &CoverReport<f64>) -> Value {
    json!({
        "system": system,
        "tau": cover.ctx().tau(),
        "delta": cover.delta(),
        "multiplier": cover.multiplier(),
        "grid": cover.ctx().grid(),
        "n_centers": cover.len(),
        "n_region": cover.region().len(),
        "min_separation": report.min_separation,
        "max_probe_distance": report.max_probe_distance,
        "separation_violations": report.separation_violations,
        "coverage_violations": report.coverage_violations,
    })
}

pub fn run(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let sys = system(cfg)?;
    let a = attractor(&sys)?;
    let seed = cfg.u64("seed")?;
    let tau = cfg.f64("tau")?;
    let delta = cfg.f64("delta")?;
    super::check_times(&sys, &[tau], "tau")?;
    let ctx = BowenContext::new(sys.clone(), tau, Some(delta))?;
    let samples = a.sample(cfg.usize("n_candidates")?, split_seed(seed, 1))?;
    let candidates: Vec<_> =
        seeded_permutation(samples.len(), split_seed(seed, 2)).into_iter().map(|i| samples.points()[i].clone()).collect();
    let cover = greedy_bisep(&ctx, &candidates, delta)?;
    let report = cover.verify(&candidates)?;

    let mut out = Outputs::default();
    let mut buf = Vec::new();
    cover.write_centers_csv(&mut buf)?;
    out.add("centers.csv", buf);
    out.add_json("cover.json", &sidecar(sys.id(), &cover, &report))?;
    let mut table = Table::new(&["j", "cell", "distance"]);
    for (j, y) in candidates.iter().enumerate() {
        let (i, d) = cover.nearest(&ctx.orbit(y)?);
        table.push(vec![j.to_string(), i.to_string(), d.to_string()]);
    }
    out.add("assignments.csv", table.to_bytes());
    if !report.ok() {
        out.fail(format!(
            "cover invariant failed: {} separation and {} coverage violations",
            report.separation_violations, report.coverage_violations
        ));
    }
    Ok(out)
}
