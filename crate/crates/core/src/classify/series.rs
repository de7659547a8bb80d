use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};
use crate::numeric::median;
use crate::scalar::Real;

/// A labelled curve `t -> value` on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRecord<R> {
    label: String,
    times: Vec<R>,
    values: Vec<R>,
}

/// Threshold verdict: converged iff the median of the last window is `< theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict<R> {
    pub converged: bool,
    pub window_median: R,
    pub theta: R,
}

/// Fraction of the series (from the end) forming the verdict window.
pub const VERDICT_WINDOW: f64 = 0.25;

pub fn check_grid<R: Real>(times: &[R]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("time grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

impl<R: Real> SeriesRecord<R> {
    pub fn new(label: impl Into<String>, times: Vec<R>, values: Vec<R>) -> Result<Self> {
        let label = label.into();
        if label.contains('\n') {
            return Err(Error::InvalidArgument("label must be a single line".into()));
        }
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), got: values.len() });
        }
        check_grid(&times)?;
        Ok(SeriesRecord { label, times, values })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn times(&self) -> &[R] {
        &self.times
    }

    pub fn values(&self) -> &[R] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (R, R)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    pub fn max_abs(&self) -> R {
        self.values.iter().fold(R::zero(), |m, v| m.max(v.abs()))
    }

    pub fn verdict(&self, theta: R) -> Verdict<R> {
        let n = self.values.len();
        let w = ((n as f64 * VERDICT_WINDOW).ceil() as usize).clamp(n.min(1), n);
        let window_median = median(&self.values[n - w..]).unwrap_or_else(R::nan);
        Verdict { converged: window_median < theta, window_median, theta }
    }

    /// `# label: ...` line, header `t,value`, one row per grid point.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Parse(e.to_string());
        writeln!(out, "# label: {}", self.label).map_err(io)?;
        writeln!(out, "t,value").map_err(io)?;
        for (t, v) in self.iter() {
            writeln!(out, "{t},{v}").map_err(io)?;
        }
        Ok(())
    }

    pub fn read_csv<Rd: Read>(input: Rd) -> Result<Self> {
        let mut lines = BufReader::new(input).lines();
        let mut next = || -> Result<Option<String>> { lines.next().transpose().map_err(|e| Error::Parse(e.to_string())) };
        let first = next()?.ok_or_else(|| Error::Parse("empty series file".into()))?;
        let label = first
            .strip_prefix("# label: ")
            .or_else(|| first.strip_prefix("# label:"))
            .ok_or_else(|| Error::Parse("missing '# label:' line".into()))?
            .to_string();
        if next()?.as_deref().map(str::trim) != Some("t,value") {
            return Err(Error::Parse("expected header 't,value'".into()));
        }
        let (mut times, mut values) = (Vec::new(), Vec::new());
        while let Some(line) = next()? {
            if line.trim().is_empty() {
                continue;
            }
            let (t, v) = line.split_once(',').ok_or_else(|| Error::Parse(format!("bad row '{line}'")))?;
            let num = |s: &str| -> Result<R> {
                s.trim().parse::<f64>().map(R::c).map_err(|_| Error::Parse(format!("bad number '{s}'")))
            };
            times.push(num(t)?);
            values.push(num(v)?);
        }
        Self::new(label, times, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(SeriesRecord::new("a", vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(SeriesRecord::new("a", vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(SeriesRecord::<f64>::new("a\nb", vec![], vec![]).is_err());
    }

    #[test]
    fn verdict_uses_last_quarter() {
        let s = SeriesRecord::new("s", (0..8).map(f64::from).collect(), vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.01, 0.02])
            .unwrap();
        let v = s.verdict(0.05);
        assert!(v.converged);
        assert!((v.window_median - 0.015).abs() < 1e-15);
        assert!(!s.verdict(0.01).converged);
    }

    #[test]
    fn csv_layout() {
        let s = SeriesRecord::new("basin x=0.1", vec![1.0, 2.0], vec![0.5, f64::INFINITY]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "# label: basin x=0.1\nt,value\n1,0.5\n2,inf\n");
        assert_eq!(SeriesRecord::read_csv(&buf[..]).unwrap(), s);
    }

    proptest! {
        #[test]
        fn csv_roundtrip(vals in prop::collection::vec(-1e6f64..1e6, 0..50), dt in 1e-9f64..10.0) {
            let times: Vec<f64> = (0..vals.len()).map(|k| k as f64 * dt).collect();
            let s = SeriesRecord::new("p", times, vals).unwrap();
            let mut buf = Vec::new();
            s.write_csv(&mut buf).unwrap();
            prop_assert_eq!(SeriesRecord::read_csv(&buf[..]).unwrap(), s);
        }
    }
}
