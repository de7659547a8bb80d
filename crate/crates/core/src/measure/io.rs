//! CSV form of particle measures: header `w,x1,...,xd`, one particle per row,
//! shortest round-trip decimals.

use std::io::{Read, Write};

use super::particle::ParticleMeasure;
use super::space::{MetricSpace, Point};
use crate::error::{Error, Result};
use crate::scalar::Real;

impl<R: Real> ParticleMeasure<R> {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["w".to_string()];
        header.extend((1..=self.space().dim()).map(|i| format!("x{i}")));
        w.write_record(&header)?;
        for (p, wt) in self.iter() {
            let mut row = vec![wt.to_string()];
            row.extend(p.coords().iter().map(|c| c.to_string()));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read_csv<Rd: Read>(input: Rd, space: MetricSpace) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let header = rdr.headers()?.clone();
        if header.get(0) != Some("w") || header.len() != space.dim() + 1 {
            return Err(Error::Parse(format!("unexpected particle header {:?}", header)));
        }
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let vals = rec
                .iter()
                .map(|s| s.trim().parse::<f64>().map(R::c).map_err(|e| Error::Parse(format!("{s}: {e}"))))
                .collect::<Result<Vec<R>>>()?;
            weights.push(vals[0]);
            points.push(Point(vals[1..].to_vec()));
        }
        ParticleMeasure::new(space, points, weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::density::{DensitySpec, Support};
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn csv_roundtrip_is_lossless(seed in 0u64..1000, n in 1usize..200) {
            let spec = DensitySpec::uniform(MetricSpace::torus(2), Support::boxed(vec![0.0, 0.0], vec![1.0, 1.0]));
            let m: ParticleMeasure<f64> = spec.sample(n, seed).unwrap();
            let m = m.pushforward(|p| p.clone()).unwrap();
            let mut buf = Vec::new();
            m.write_csv(&mut buf).unwrap();
            let back = ParticleMeasure::read_csv(buf.as_slice(), MetricSpace::torus(2)).unwrap();
            prop_assert_eq!(back, m);
        }
    }

    #[test]
    fn header_format() {
        let m = ParticleMeasure::dirac(MetricSpace::torus(2), Point(vec![0.1, 0.25])).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "w,x1,x2\n1,0.1,0.25\n");
    }

    #[test]
    fn wrong_header_rejected() {
        let r = ParticleMeasure::<f64>::read_csv("w,x1\n1,0.5\n".as_bytes(), MetricSpace::torus(2));
        assert!(matches!(r, Err(Error::Parse(_))));
    }
}
