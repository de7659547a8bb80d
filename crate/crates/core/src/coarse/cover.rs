use std::io::{Read, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measure::{MetricSpace, Point};
use crate::scalar::Real;
use crate::systems::BowenContext;

/// Default radius multiplier of the cells `N_i` (in units of `delta`).
pub const CELL_MULTIPLIER: f64 = 3.0;

/// A `(d_tau, delta)`-bi-separated set of centers with its cell assignment.
///
/// Balls `M_i` are the open Bowen balls `B_delta^tau(x_i)`; cells `N_i` are
/// the nearest-center regions truncated at `multiplier * delta`, ties going
/// to the lowest index.
#[derive(Debug, Clone)]
pub struct CoverSpec<R: Real> {
    ctx: BowenContext<R>,
    delta: R,
    multiplier: R,
    centers: Vec<Point<R>>,
    center_orbits: Vec<Vec<Point<R>>>,
    /// The candidate set the cover was built from.
    region: Vec<Point<R>>,
}

/// Invariant check of a cover against probe points of `B_delta^tau(A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverReport<R> {
    pub min_separation: R,
    pub max_probe_distance: R,
    pub separation_violations: usize,
    pub coverage_violations: usize,
}

impl<R: Real> CoverReport<R> {
    pub fn ok(&self) -> bool {
        self.separation_violations == 0 && self.coverage_violations == 0
    }
}

/// Greedy maximal `2 delta`-separated subset of `candidates` in scan order.
pub fn greedy_bisep<R: Real>(ctx: &BowenContext<R>, candidates: &[Point<R>], delta: R) -> Result<CoverSpec<R>> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    if !(delta > R::zero()) {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    let orbits = candidates.par_iter().map(|c| ctx.orbit(c)).collect::<Result<Vec<_>>>()?;
    let sep = R::c(2.0) * delta;
    let mut chosen: Vec<usize> = Vec::new();
    for (i, o) in orbits.iter().enumerate() {
        if chosen.iter().all(|&j| !ctx.orbits_within(&orbits[j], o, sep)) {
            chosen.push(i);
        }
    }
    let centers = chosen.iter().map(|&i| candidates[i].clone()).collect();
    let center_orbits = chosen.iter().map(|&i| orbits[i].clone()).collect();
    Ok(CoverSpec {
        ctx: ctx.clone(),
        delta,
        multiplier: R::c(CELL_MULTIPLIER),
        centers,
        center_orbits,
        region: candidates.to_vec(),
    })
}

impl<R: Real> CoverSpec<R> {
    /// Cover from explicit centers (e.g. read back from disk); separation is not re-checked.
    pub fn from_centers(ctx: &BowenContext<R>, delta: R, centers: Vec<Point<R>>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::EmptyCandidates);
        }
        let center_orbits = centers.iter().map(|c| ctx.orbit(c)).collect::<Result<Vec<_>>>()?;
        Ok(CoverSpec {
            ctx: ctx.clone(),
            delta,
            multiplier: R::c(CELL_MULTIPLIER),
            region: centers.clone(),
            centers,
            center_orbits,
        })
    }

    /// Changes the cell radius multiplier (3 by default).
    pub fn with_multiplier(mut self, m: R) -> Self {
        self.multiplier = m;
        self
    }

    pub fn ctx(&self) -> &BowenContext<R> {
        &self.ctx
    }

    pub fn delta(&self) -> R {
        self.delta
    }

    pub fn multiplier(&self) -> R {
        self.multiplier
    }

    pub fn centers(&self) -> &[Point<R>] {
        &self.centers
    }

    pub fn center_orbits(&self) -> &[Vec<Point<R>>] {
        &self.center_orbits
    }

    pub fn region(&self) -> &[Point<R>] {
        &self.region
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Nearest center and its Bowen distance.
    pub fn nearest(&self, orbit: &[Point<R>]) -> (usize, R) {
        let space = self.ctx.system().space();
        let mut best = (0, R::infinity());
        'centers: for (i, c) in self.center_orbits.iter().enumerate() {
            let mut d = R::zero();
            for (p, q) in c.iter().zip(orbit) {
                d = d.max(space.distance(p, q));
                // cannot beat the current best
                if !(d < best.1) {
                    continue 'centers;
                }
            }
            best = (i, d);
        }
        best
    }

    /// Cell index of an orbit, `None` outside every `multiplier * delta` ball.
    pub fn assign_orbit(&self, orbit: &[Point<R>]) -> Option<usize> {
        let (i, d) = self.nearest(orbit);
        (d < self.multiplier * self.delta).then_some(i)
    }

    pub fn assign(&self, y: &Point<R>) -> Result<Option<usize>> {
        Ok(self.assign_orbit(&self.ctx.orbit(y)?))
    }

    /// Membership in the ball `M_i`.
    pub fn in_ball(&self, i: usize, orbit: &[Point<R>]) -> bool {
        self.ctx.orbits_within(&self.center_orbits[i], orbit, self.delta)
    }

    /// Ball `M_i` containing `y`, evolving `y` along the grid only while some
    /// center remains within `delta`. Agrees with [`Self::in_ball`] on `ctx.orbit(y)`.
    pub fn ball_of(&self, y: &Point<R>) -> Result<Option<usize>> {
        let sys = self.ctx.system();
        let space = sys.space();
        let mut alive: Vec<usize> = (0..self.len()).collect();
        let mut cur = y.clone();
        let mut prev = R::zero();
        for (k, &t) in self.ctx.grid().iter().enumerate() {
            cur = sys.evolve(t - prev, &cur)?;
            prev = t;
            alive.retain(|&i| space.distance(&self.center_orbits[i][k], &cur) < self.delta);
            if alive.is_empty() {
                return Ok(None);
            }
        }
        Ok(alive.first().copied())
    }

    /// Checks pairwise separation and that every probe is assigned within `3 delta`.
    pub fn verify(&self, probes: &[Point<R>]) -> Result<CoverReport<R>> {
        let sep = R::c(2.0) * self.delta;
        let mut min_separation = R::infinity();
        let mut separation_violations = 0;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let d = self.ctx.orbit_distance(&self.center_orbits[i], &self.center_orbits[j]);
                min_separation = min_separation.min(d);
                separation_violations += usize::from(d < sep);
            }
        }
        let reach = R::c(3.0) * self.delta;
        let dists = probes
            .par_iter()
            .map(|p| Ok(self.nearest(&self.ctx.orbit(p)?).1))
            .collect::<Result<Vec<R>>>()?;
        Ok(CoverReport {
            min_separation,
            max_probe_distance: dists.iter().fold(R::zero(), |m, d| m.max(*d)),
            separation_violations,
            coverage_violations: dists.iter().filter(|d| !(**d < reach)).count(),
        })
    }

    /// Centers as CSV with header `i,x1..xd`.
    pub fn write_centers_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let dim = self.ctx.system().space().dim();
        let mut header = vec!["i".to_string()];
        header.extend((1..=dim).map(|k| format!("x{k}")));
        w.write_record(&header)?;
        for (i, c) in self.centers.iter().enumerate() {
            let mut row = vec![i.to_string()];
            row.extend(c.coords().iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(())
    }
}

/// Reads centers written by [`CoverSpec::write_centers_csv`].
pub fn read_centers_csv<R: Real, Rd: Read>(input: Rd, space: &MetricSpace) -> Result<Vec<Point<R>>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    let dim = space.dim();
    let expected: Vec<String> = std::iter::once("i".to_string()).chain((1..=dim).map(|k| format!("x{k}"))).collect();
    if header.iter().collect::<Vec<_>>() != expected.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(Error::Parse(format!("expected header {}", expected.join(","))));
    }
    let mut out = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        if rec.get(0).and_then(|s| s.parse::<usize>().ok()) != Some(k) {
            return Err(Error::Parse(format!("row {k}: bad index")));
        }
        let coords = (1..=dim)
            .map(|j| {
                rec.get(j)
                    .and_then(|s| s.parse::<f64>().ok())
                    .map(R::c)
                    .ok_or_else(|| Error::Parse(format!("row {k}: bad coordinate")))
            })
            .collect::<Result<Vec<R>>>()?;
        out.push(Point(coords));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::zoo::Identity;
    use crate::systems::{build_system, SystemSpec, ZooParams};
    use std::sync::Arc;

    fn line_ctx() -> BowenContext<f64> {
        let sys = SystemSpec::new(Arc::new(Identity::new(MetricSpace::line())));
        BowenContext::new(sys, 0.0, None).unwrap()
    }

    fn pts(xs: &[f64]) -> Vec<Point<f64>> {
        xs.iter().map(|x| Point(vec![*x])).collect()
    }

    #[test]
    fn greedy_line_example() {
        let cover = greedy_bisep(&line_ctx(), &pts(&[0.0, 0.5, 0.9, 2.0]), 0.3).unwrap();
        assert_eq!(cover.centers(), &pts(&[0.0, 0.9, 2.0])[..]);
        assert_eq!(cover.assign(&Point(vec![0.5])).unwrap(), Some(1));
        // equidistant from centers 0 and 0.9: lowest index wins
        assert_eq!(cover.assign(&Point(vec![0.45])).unwrap(), Some(0));
        assert_eq!(cover.assign(&Point(vec![5.0])).unwrap(), None);
    }

    #[test]
    fn degenerate_candidate_sets() {
        let one = greedy_bisep(&line_ctx(), &pts(&[0.7]), 0.1).unwrap();
        assert_eq!(one.centers(), &pts(&[0.7])[..]);
        let cluster = greedy_bisep(&line_ctx(), &pts(&[0.0, 0.1, -0.1, 0.15]), 0.1).unwrap();
        assert_eq!(cluster.len(), 1);
        for p in cluster.region() {
            assert_eq!(cluster.assign(p).unwrap(), Some(0));
        }
        assert_eq!(greedy_bisep(&line_ctx(), &[], 0.1).unwrap_err(), Error::EmptyCandidates);
    }

    #[test]
    fn doubling_cover_is_separated_and_covering() {
        let sys = build_system::<f64>("doubling", &ZooParams::default()).unwrap();
        let ctx = BowenContext::new(sys.clone(), 4.0, None).unwrap();
        let cands = sys.attractor().unwrap().sample(400, 5).unwrap();
        let cover = greedy_bisep(&ctx, cands.points(), 0.02).unwrap();
        let report = cover.verify(cands.points()).unwrap();
        assert!(report.ok(), "{report:?}");
        assert!(report.max_probe_distance < 0.04 + 1e-12);
    }

    #[test]
    fn ball_lookup_matches_orbit_membership() {
        for (id, tau) in [("doubling", 4.0), ("rotation", 2.0), ("cat", 2.0)] {
            let sys = build_system::<f64>(id, &ZooParams::default()).unwrap();
            let ctx = BowenContext::new(sys.clone(), tau, Some(0.05)).unwrap();
            let a = sys.attractor().unwrap();
            let cover = greedy_bisep(&ctx, a.sample(300, 1).unwrap().points(), 0.05).unwrap();
            for y in a.sample(500, 2).unwrap().points() {
                let orbit = ctx.orbit(y).unwrap();
                assert_eq!(cover.ball_of(y).unwrap(), (0..cover.len()).find(|&i| cover.in_ball(i, &orbit)), "{id}");
            }
        }
    }

    #[test]
    fn centers_csv_roundtrip() {
        let sys = build_system::<f64>("cat", &ZooParams::default()).unwrap();
        let ctx = BowenContext::new(sys.clone(), 2.0, None).unwrap();
        let cands = sys.attractor().unwrap().sample(50, 1).unwrap();
        let cover = greedy_bisep(&ctx, cands.points(), 0.05).unwrap();
        let mut buf = Vec::new();
        cover.write_centers_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("i,x1,x2\n0,"));
        let back: Vec<Point<f64>> = read_centers_csv(&buf[..], sys.space()).unwrap();
        assert_eq!(back, cover.centers());
    }
}
