//! `simulate`: one trajectory plus pushforward ensembles.

use ergokit::numeric::split_seed;
use ergokit::{Point, TimeKind};

use super::{check_times, neighbourhood, point_for, support_center, system, Outputs};
use crate::config::RunConfig;
use crate::CliError;

/// Output times: `0..=steps` for maps, `t_max k / n` with `n = round(t_max / dt)` for flows.
pub fn output_times(kind: TimeKind, steps: usize, t_max: f64, dt: f64) -> Vec<f64> {
    match kind {
        TimeKind::Discrete => (0..=steps).map(|k| k as f64).collect(),
        TimeKind::Continuous => {
            let n = ((t_max / dt).round() as usize).max(1);
            (0..=n).map(|k| t_max * k as f64 / n as f64).collect()
        }
    }
}

/// CSV `t,x1..xd`.
pub fn trajectory_csv(times: &[f64], points: &[Point<f64>]) -> Vec<u8> {
    let d = points.first().map_or(0, Point::dim);
    let mut s = String::from("t");
    for i in 1..=d {
        s.push_str(&format!(",x{i}"));
    }
    s.push('\n');
    for (t, p) in times.iter().zip(points) {
        s.push_str(&t.to_string());
        for c in p.coords() {
            s.push_str(&format!(",{c}"));
        }
        s.push('\n');
    }
    s.into_bytes()
}

/// Inverse of [`trajectory_csv`].
pub fn read_trajectory_csv(text: &str) -> Result<(Vec<f64>, Vec<Point<f64>>), CliError> {
    let table = super::Table::parse(text)?;
    if table.header.first().map(String::as_str) != Some("t") {
        return Err(CliError::Runtime("trajectory header must start with 't'".into()));
    }
    let mut times = Vec::new();
    let mut points = Vec::new();
    for r in &table.rows {
        let v = r.iter().map(|s| s.parse::<f64>()).collect::<Result<Vec<f64>, _>>().map_err(|e| CliError::Runtime(e.to_string()))?;
        times.push(v[0]);
        points.push(Point(v[1..].to_vec()));
    }
    Ok((times, points))
}

pub fn run(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let sys = system(cfg)?;
    let id = sys.id().to_string();
    let u = neighbourhood(cfg, &id)?;
    let given = cfg.list_f64("x0")?;
    let x0 = if id == "counterexample" {
        let base_dim = sys.space().dim() - 1;
        let mut c = if given.is_empty() { support_center(&u)[..base_dim].to_vec() } else { given };
        if c.len() != base_dim {
            return Err(CliError::Config(format!("x0 needs {base_dim} base coordinates for counterexample, got {}", c.len())));
        }
        c.push(cfg.f64("y0")?);
        point_for(&sys, c, "x0")?
    } else {
        point_for(&sys, if given.is_empty() { support_center(&u) } else { given }, "x0")?
    };
    let mut snaps = cfg.list_f64("snapshot_times")?;
    check_times(&sys, &snaps, "snapshot_times")?;
    snaps.sort_by(f64::total_cmp);
    snaps.dedup();

    let times = output_times(sys.time_kind(), cfg.usize("steps")?, cfg.f64("t_max")?, cfg.f64("dt")?);
    let traj = sys.trajectory(&x0, &times)?;
    let mut out = Outputs::default();
    out.add("trajectory.csv", trajectory_csv(&times, &traj));

    if !snaps.is_empty() {
        let nu = u.sample::<f64>(cfg.usize("n_particles")?, split_seed(cfg.u64("seed")?, 1))?;
        let ensembles = ergokit::classify::along_grid(&sys, &nu, &snaps, |_, m| Ok(m.clone()))?;
        for (t, m) in snaps.iter().zip(&ensembles) {
            out.add_particles(format!("ensemble_t{t}.csv"), m)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_roundtrip() {
        let times = vec![0.0, 0.1, 0.2];
        let pts = vec![Point(vec![0.1, 1.0 / 3.0]), Point(vec![0.2, 0.5]), Point(vec![1e-17, 0.7])];
        let bytes = trajectory_csv(&times, &pts);
        let (t, p) = read_trajectory_csv(std::str::from_utf8(&bytes).unwrap()).unwrap();
        assert_eq!((t, p), (times, pts));
    }

    #[test]
    fn row_counts() {
        assert_eq!(output_times(TimeKind::Discrete, 5, 0.0, 1.0).len(), 6);
        let c = output_times(TimeKind::Continuous, 0, 10.0, 0.1);
        assert_eq!(c.len(), 101);
        assert_eq!(*c.last().unwrap(), 10.0);
    }
}
