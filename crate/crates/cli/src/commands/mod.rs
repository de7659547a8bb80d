//! Subcommand bodies. Each computes its files in memory; nothing touches the
//! output directory until the whole computation has succeeded or produced a
//! reportable stage failure.

pub mod classify;
pub mod counterexample;
pub mod cover;
pub mod plotdata;
pub mod simulate;
pub mod theorem_demo;

use std::path::Path;
use std::sync::Arc;

use ergokit::classify::SeriesRecord;
use ergokit::measure::Support;
use ergokit::systems::{build_system, default_neighbourhood, Attractor};
use ergokit::{DensitySpec, ParticleMeasure, Point, SystemSpec, TimeKind};

use crate::config::{RunConfig, Subcommand};
use crate::manifest::{OutputDir, RunManifest};
use crate::CliError;

/// Files produced by a command, plus a stage failure that still warrants
/// writing them (reported as a runtime error afterwards).
#[derive(Debug, Default)]
pub struct Outputs {
    pub files: Vec<(String, Vec<u8>)>,
    pub failure: Option<String>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    pub fn add_series(&mut self, name: impl Into<String>, s: &SeriesRecord<f64>) -> Result<(), CliError> {
        let mut buf = Vec::new();
        s.write_csv(&mut buf)?;
        self.add(name, buf);
        Ok(())
    }

    pub fn add_particles(&mut self, name: impl Into<String>, m: &ParticleMeasure<f64>) -> Result<(), CliError> {
        let mut buf = Vec::new();
        m.write_csv(&mut buf)?;
        self.add(name, buf);
        Ok(())
    }

    pub fn add_json(&mut self, name: impl Into<String>, v: &serde_json::Value) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(v).map_err(|e| CliError::Runtime(e.to_string()))?;
        self.add(name, (text + "\n").into_bytes());
        Ok(())
    }

    pub fn fail(&mut self, msg: impl Into<String>) {
        if self.failure.is_none() {
            self.failure = Some(msg.into());
        }
    }
}

/// Computes, then writes the outputs and the manifest into `out`.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<RunManifest, CliError> {
    let outputs = match cfg.subcommand {
        Subcommand::Simulate => simulate::run(cfg)?,
        Subcommand::Classify => classify::run(cfg)?,
        Subcommand::TheoremDemo => theorem_demo::run(cfg)?,
        Subcommand::Counterexample => counterexample::run(cfg)?,
        Subcommand::EmitPlotdata => plotdata::run(cfg)?,
        Subcommand::Cover => cover::run(cfg)?,
    };
    let mut dir = OutputDir::create(out)?;
    for (name, bytes) in &outputs.files {
        dir.write_bytes(name, bytes)?;
    }
    let manifest = dir.finish(cfg)?;
    match outputs.failure {
        Some(msg) => Err(CliError::Runtime(msg)),
        None => Ok(manifest),
    }
}

/// The configured zoo member.
pub fn system(cfg: &RunConfig) -> Result<SystemSpec<f64>, CliError> {
    Ok(build_system(cfg.str("system"), &cfg.zoo_params()?)?)
}

pub fn neighbourhood(cfg: &RunConfig, id: &str) -> Result<DensitySpec, CliError> {
    Ok(default_neighbourhood(id, &cfg.zoo_params()?)?)
}

pub fn attractor(sys: &SystemSpec<f64>) -> Result<Arc<dyn Attractor<f64>>, CliError> {
    sys.attractor().cloned().ok_or_else(|| CliError::Config(format!("system '{}' declares no attractor", sys.id())))
}

/// Center of a density's support.
pub fn support_center(d: &DensitySpec) -> Vec<f64> {
    match &d.support {
        Support::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect(),
        Support::Ball { center, .. } => center.clone(),
    }
}

/// A point of the right dimension for `sys`, or a configuration error.
pub fn point_for(sys: &SystemSpec<f64>, coords: Vec<f64>, key: &str) -> Result<Point<f64>, CliError> {
    let d = sys.space().dim();
    if coords.len() != d {
        return Err(CliError::Config(format!("{key} needs {d} coordinates for '{}', got {}", sys.id(), coords.len())));
    }
    let mut p = Point(coords);
    sys.space().canonicalize(&mut p);
    Ok(p)
}

/// Rejects non-integral times for discrete systems.
pub fn check_times(sys: &SystemSpec<f64>, times: &[f64], key: &str) -> Result<(), CliError> {
    if let Some(t) = times.iter().find(|t| **t < 0.0) {
        return Err(CliError::Config(format!("{key}: negative time {t}")));
    }
    if sys.time_kind() == TimeKind::Discrete {
        if let Some(t) = times.iter().find(|t| t.fract() != 0.0) {
            return Err(CliError::Config(format!("{key}: '{}' is discrete, time {t} is not an integer", sys.id())));
        }
    }
    Ok(())
}

/// Deterministic pseudo-random permutation of `0..n` keyed by `seed`.
pub fn seeded_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<(u64, usize)> = (0..n).map(|i| (ergokit::numeric::split_seed(seed, i as u64), i)).collect();
    idx.sort_unstable();
    idx.into_iter().map(|(_, i)| i).collect()
}

/// Simple comma-separated table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Cells must not contain commas or newlines.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s.into_bytes()
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<String> =
            lines.next().ok_or_else(|| CliError::Runtime("empty table".into()))?.split(',').map(String::from).collect();
        let rows = lines
            .map(|l| {
                let r: Vec<String> = l.split(',').map(String::from).collect();
                if r.len() == header.len() {
                    Ok(r)
                } else {
                    Err(CliError::Runtime(format!("table row '{l}' has {} cells, header has {}", r.len(), header.len())))
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(Table { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j].as_str()).collect())
    }

    pub fn column_f64(&self, name: &str) -> Option<Vec<f64>> {
        self.column(name)?.iter().map(|s| s.parse().ok()).collect()
    }
}

/// Replaces characters that would break a [`Table`] cell.
pub fn cell(s: &str) -> String {
    s.replace([',', '\n'], ";")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_roundtrip() {
        let mut t = Table::new(&["t", "label"]);
        t.push(vec!["0.5".into(), cell("a, b")]);
        let back = Table::parse(std::str::from_utf8(&t.to_bytes()).unwrap()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.column_f64("t").unwrap(), vec![0.5]);
        assert_eq!(back.column("label").unwrap(), vec!["a; b"]);
        assert!(Table::parse("a,b\n1\n").is_err());
    }

    #[test]
    fn permutation_is_a_permutation() {
        let mut p = seeded_permutation(100, 7);
        assert_ne!(p, (0..100).collect::<Vec<_>>());
        assert_eq!(p, seeded_permutation(100, 7));
        p.sort();
        assert_eq!(p, (0..100).collect::<Vec<_>>());
    }
}
