//! `emit-plotdata`: merge series CSVs into a gnuplot data file and an SVG chart.
//!
//! The data file has one row per time of the union grid. Series without a
//! value at that time get `?`, gnuplot's conventional missing-data marker
//! (`set datafile missing "?"`).

use std::fmt::Write as _;
use std::path::Path;

use ergokit::classify::SeriesRecord;

use super::Outputs;
use crate::config::RunConfig;
use crate::CliError;

pub const MISSING: &str = "?";

pub fn load_series(path: &Path) -> Result<SeriesRecord<f64>, CliError> {
    let f = std::fs::File::open(path).map_err(|e| CliError::Config(format!("input {}: {e}", path.display())))?;
    SeriesRecord::read_csv(f).map_err(|e| CliError::Config(format!("input {}: {e}", path.display())))
}

/// Sorted union of the time grids.
pub fn union_grid(series: &[SeriesRecord<f64>]) -> Vec<f64> {
    let mut g: Vec<f64> = series.iter().flat_map(|s| s.times().iter().copied()).collect();
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// Whitespace-separated columns `t v1 .. vk`, headed by a comment naming them.
pub fn merge(series: &[SeriesRecord<f64>]) -> String {
    let grid = union_grid(series);
    let mut s = String::from("# t");
    for r in series {
        let _ = write!(s, " \"{}\"", r.label().replace('"', "'"));
    }
    s.push('\n');
    let mut cursors = vec![0usize; series.len()];
    for t in &grid {
        s.push_str(&t.to_string());
        for (r, c) in series.iter().zip(cursors.iter_mut()) {
            if *c < r.len() && r.times()[*c] == *t {
                let _ = write!(s, " {}", r.values()[*c]);
                *c += 1;
            } else {
                let _ = write!(s, " {MISSING}");
            }
        }
        s.push('\n');
    }
    s
}

/// One merged row: time and one optional value per series.
pub type MergedRow = (f64, Vec<Option<f64>>);

/// Parses a file written by [`merge`]; missing cells become `None`.
pub fn parse_merged(text: &str) -> Result<(Vec<String>, Vec<MergedRow>), CliError> {
    let mut lines = text.lines();
    let head = lines.next().and_then(|l| l.strip_prefix("# t")).ok_or_else(|| CliError::Runtime("missing plot header".into()))?;
    let labels: Vec<String> = head.split('"').skip(1).step_by(2).map(String::from).collect();
    let rows = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let mut cells = l.split_whitespace();
            let bad = || CliError::Runtime(format!("bad plot row '{l}'"));
            let t = cells.next().and_then(|c| c.parse().ok()).ok_or_else(bad)?;
            let vals = cells
                .map(|c| if c == MISSING { Ok(None) } else { c.parse().map(Some).map_err(|_| bad()) })
                .collect::<Result<Vec<_>, _>>()?;
            if vals.len() != labels.len() {
                return Err(bad());
            }
            Ok((t, vals))
        })
        .collect::<Result<_, _>>()?;
    Ok((labels, rows))
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Standalone SVG line chart of the finite points of each series.
pub fn svg(series: &[SeriesRecord<f64>]) -> String {
    let (w, h, m) = (640.0, 400.0, 50.0);
    let pts = || series.iter().flat_map(|s| s.iter()).filter(|(t, v)| t.is_finite() && v.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (t, v) in pts() {
        x0 = x0.min(t);
        x1 = x1.max(t);
        y0 = y0.min(v);
        y1 = y1.max(v);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let sx = |t: f64| m + (t - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |v: f64| h - m - (v - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#, w - 2.0 * m, h - 2.0 * m);
    let _ = writeln!(s, r#"<text x="{m}" y="{}" font-size="11">{x0}</text>"#, h - m + 15.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{x1}</text>"#, w - m, h - m + 15.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{y0}</text>"#, m - 4.0, h - m);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{y1}</text>"#, m - 4.0, m + 4.0);
    for (k, r) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let path: Vec<String> =
            r.iter().filter(|(t, v)| t.is_finite() && v.is_finite()).map(|(t, v)| format!("{:.2},{:.2}", sx(t), sy(v))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11" fill="{color}">{}</text>"#, m + 6.0, m + 14.0 * (k as f64 + 1.0), esc(r.label()));
    }
    s.push_str("</svg>\n");
    s
}

pub fn run(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let series = cfg.list_str("inputs").iter().map(|p| load_series(Path::new(p))).collect::<Result<Vec<_>, _>>()?;
    let name = cfg.str("name");
    let mut out = Outputs::default();
    out.add(format!("{name}.dat"), merge(&series).into_bytes());
    out.add(format!("{name}.svg"), svg(&series).into_bytes());
    Ok(out)
}
