//! Run configuration: per-subcommand key tables, flat `key = value` files and
//! typed access. Precedence: built-in defaults < config file < flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use ergokit::systems::ZOO_IDS;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Subcommand {
    Simulate,
    Classify,
    TheoremDemo,
    Counterexample,
    EmitPlotdata,
    Cover,
}

pub const SUBCOMMANDS: [Subcommand; 6] = [
    Subcommand::Simulate,
    Subcommand::Classify,
    Subcommand::TheoremDemo,
    Subcommand::Counterexample,
    Subcommand::EmitPlotdata,
    Subcommand::Cover,
];

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Simulate => "simulate",
            Subcommand::Classify => "classify",
            Subcommand::TheoremDemo => "theorem-demo",
            Subcommand::Counterexample => "counterexample",
            Subcommand::EmitPlotdata => "emit-plotdata",
            Subcommand::Cover => "cover",
        }
    }

    pub fn about(self) -> &'static str {
        match self {
            Subcommand::Simulate => "Trajectory CSV and pushforward-ensemble snapshots",
            Subcommand::Classify => "Basin, attracting and correlation series with threshold verdicts",
            Subcommand::TheoremDemo => "Cover, coarse-graining and Bowen-ratio pipeline on a declared attractor",
            Subcommand::Counterexample => "Skew-flow checks: integrator discrepancy, b2' profile, concentration, fiber decay",
            Subcommand::EmitPlotdata => "Merge series CSVs into a gnuplot data file and an SVG chart",
            Subcommand::Cover => "Greedy Bowen-metric bi-separated cover of attractor samples",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        SUBCOMMANDS.into_iter().find(|s| s.name() == name)
    }

    pub fn keys(self) -> Vec<Key> {
        use Kind::*;
        let k = |name, default, kind, help| Key { name, default, kind, help };
        let zoo = || {
            vec![
                k("y0", "0.2", Real, "counterexample fiber coordinate"),
                k("rotation_speed", "1", Real, "speed of the circle rotation flow"),
                k("identity_dim", "1", Count, "torus dimension of the identity system"),
            ]
        };
        let mut keys = match self {
            Subcommand::Simulate => vec![
                k("system", "doubling", System, "system id"),
                k("x0", "", RealList, "initial point (counterexample: base coordinates, fiber from y0); default: center of the neighbourhood"),
                k("steps", "10", Index, "number of steps (discrete systems)"),
                k("t_max", "10", PosReal, "final time (continuous systems)"),
                k("dt", "0.1", PosReal, "output spacing (continuous systems)"),
                k("snapshot_times", "", RealList, "times at which to write pushforward ensembles"),
                k("n_particles", "1000", Count, "ensemble size for snapshots"),
                k("seed", "1", Seed, "random seed"),
            ],
            Subcommand::Classify => vec![
                k("system", "doubling_contract", System, "system id"),
                k("experiments", "basin,attracting,classical,operational", Text, "comma list from basin, attracting, classical, operational"),
                k("t_grid", "", RealList, "attracting time grid; default geometric 1,2,4,..,t_max"),
                k("t_max", "32", PosReal, "end of the default attracting grid"),
                k("n_particles", "20000", Count, "initial ensemble size"),
                k("n_ref", "100000", Count, "quadrature nodes of the reference measure"),
                k("basin_x", "", RealList, "basin test point; default: a seeded sample of the attractor"),
                k("basin_t_max", "1024", PosReal, "end of the geometric basin grid"),
                k("basin_samples", "20000", Count, "time samples per Birkhoff measure (continuous systems)"),
                k("corr_t_max", "15", Index, "correlations at t = 0..corr_t_max"),
                k("corr_n", "20000", Count, "ensemble size for correlations"),
                k("g1_axis", "0", Index, "axis of the first cosine observable"),
                k("g2_axis", "", Index, "axis of the second cosine observable; default: last torus axis"),
                k("theta", "0.05", PosReal, "convergence threshold on the last-window median"),
                k("mc_sigma", "3", PosReal, "standard errors allowed in Monte-Carlo comparisons"),
                k("probe_anchors", "64", Count, "anchors per measure in the BL probe family"),
                k("seed", "1", Seed, "random seed"),
            ],
            Subcommand::TheoremDemo => vec![
                k("system", "doubling_contract", System, "system id (needs a declared attractor)"),
                k("eps", "0.3", PosReal, "target accuracy epsilon"),
                k("delta", "", PosReal, "cover scale; must be < eps/6; default 0.99 eps/6"),
                k("tau", "5", NonNegReal, "Bowen horizon of the cover"),
                k("n_particles", "20000", Count, "particles of the initial law nu"),
                k("n_mu", "50000", Count, "samples of the invariant measure mu"),
                k("n_candidates", "2000", Count, "extra attractor samples offered to the greedy cover"),
                k("n_track", "20", Count, "particles whose orbit-tracking settle time fixes T"),
                k("track_t_max", "40", PosReal, "horizon of the orbit-tracking search"),
                k("track_candidates", "200", Index, "attractor samples tried per tracked particle"),
                k("t_max", "30", Index, "comparison times t = 0..t_max"),
                k("tau_list", "1,2,3,4,5", RealList, "horizons of the Bowen-ratio scan"),
                k("n_x", "5", Count, "centers per horizon in the Bowen-ratio scan"),
                k("n_mc", "10000", Count, "Monte-Carlo samples per Bowen ratio"),
                k("mc_sigma", "3", PosReal, "standard errors allowed in Monte-Carlo comparisons"),
                k("settle_after", "20", NonNegReal, "the conclusion is checked for t >= settle_after"),
                k("seed", "1", Seed, "random seed"),
            ],
            Subcommand::Counterexample => vec![
                k("y0_list", "0.01,0.05,0.2,0.5", RealList, "fibers for the integrator discrepancy"),
                k("base_x", "0,0", RealList, "base point on the torus"),
                k("t_max", "10", PosReal, "discrepancy horizon"),
                k("grid", "0.01", PosReal, "discrepancy sampling step"),
                k("step", "0.001", PosReal, "RK4 step"),
                k("b2_range", "0.1", PosReal, "b2' profile on [-b2_range, b2_range]"),
                k("b2_points", "401", Count, "b2' profile points"),
                k("y0", "0.2", Real, "fiber of the concentration profile"),
                k("eps_over_m", "1", PosReal, "concentration radius in units of the field bound"),
                k("concentration_t", "100,1000,10000", RealList, "profile times"),
                k("quadrature_n", "100000", Count, "midpoint nodes of the profile quadrature"),
                k("fiber_n", "5000", Count, "particles of the fiber-decay ensemble"),
                k("fiber_t_max", "10000", PosReal, "end of the geometric fiber-decay grid"),
                k("field_grid", "10000", Count, "base points used to bound the base field"),
                k("seed", "1", Seed, "random seed"),
            ],
            Subcommand::EmitPlotdata => vec![
                k("inputs", "", Text, "comma list of series CSV files"),
                k("name", "plot", Text, "output stem"),
            ],
            Subcommand::Cover => vec![
                k("system", "doubling", System, "system id (needs a declared attractor)"),
                k("tau", "3", NonNegReal, "Bowen horizon"),
                k("delta", "0.02", PosReal, "separation scale"),
                k("n_candidates", "500", Count, "attractor samples scanned by the greedy cover"),
                k("seed", "1", Seed, "random seed"),
            ],
        };
        if matches!(self, Subcommand::Simulate | Subcommand::Classify | Subcommand::TheoremDemo | Subcommand::Cover) {
            keys.extend(zoo());
        }
        keys
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Real,
    PosReal,
    NonNegReal,
    /// Integer >= 1.
    Count,
    /// Integer >= 0.
    Index,
    Seed,
    System,
    RealList,
    Text,
}

#[derive(Debug, Clone)]
pub struct Key {
    pub name: &'static str,
    pub default: &'static str,
    pub kind: Kind,
    pub help: &'static str,
}

impl Key {
    pub fn flag(&self) -> String {
        self.name.replace('_', "-")
    }

    fn check(&self, v: &str) -> Result<(), String> {
        if v.is_empty() {
            return Ok(());
        }
        let real = || v.parse::<f64>().map_err(|_| format!("'{v}' is not a number"));
        match self.kind {
            Kind::Real => real().and_then(|x| if x.is_finite() { Ok(()) } else { Err("must be finite".into()) }),
            Kind::PosReal => real().and_then(|x| if x > 0.0 && x.is_finite() { Ok(()) } else { Err("must be > 0".into()) }),
            Kind::NonNegReal => real().and_then(|x| if x >= 0.0 && x.is_finite() { Ok(()) } else { Err("must be >= 0".into()) }),
            Kind::Count => match v.parse::<usize>() {
                Ok(0) => Err("must be >= 1".into()),
                Ok(_) => Ok(()),
                Err(_) => Err(format!("'{v}' is not a nonnegative integer")),
            },
            Kind::Index => v.parse::<usize>().map(|_| ()).map_err(|_| format!("'{v}' is not an index")),
            Kind::Seed => v.parse::<u64>().map(|_| ()).map_err(|_| format!("'{v}' is not a 64-bit seed")),
            Kind::System => {
                if ZOO_IDS.contains(&v) {
                    Ok(())
                } else {
                    Err(format!("unknown system '{v}' (known: {})", ZOO_IDS.join(", ")))
                }
            }
            Kind::RealList => parse_list(v).map(|_| ()),
            Kind::Text => Ok(()),
        }
    }
}

fn parse_list(v: &str) -> Result<Vec<f64>, String> {
    v.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| format!("'{s}' is not a finite number"))
        })
        .collect()
}

/// Normalizes a key spelling (`t-max` and `t_max` are the same key).
pub fn normalize_key(k: &str) -> String {
    k.trim().replace('-', "_")
}

/// Parses a flat config file: `key = value` lines, `#` comments.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected 'key = value'", n + 1)))?;
        out.push((normalize_key(k), v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("config file {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub values: BTreeMap<String, String>,
}

impl RunConfig {
    /// Applies layers in order (later wins) over the defaults and validates every key.
    pub fn resolve(subcommand: Subcommand, layers: &[Vec<(String, String)>]) -> Result<Self, CliError> {
        let keys = subcommand.keys();
        let mut values: BTreeMap<String, String> = keys.iter().map(|k| (k.name.to_string(), k.default.to_string())).collect();
        for layer in layers {
            for (k, v) in layer {
                let k = normalize_key(k);
                if !values.contains_key(&k) {
                    return Err(CliError::Config(format!("unknown key '{k}' for {subcommand}")));
                }
                values.insert(k, v.clone());
            }
        }
        for key in &keys {
            key.check(&values[key.name]).map_err(|e| CliError::Config(format!("{}: {e}", key.name)))?;
        }
        let cfg = RunConfig { subcommand, values };
        cfg.cross_check()?;
        Ok(cfg)
    }

    fn cross_check(&self) -> Result<(), CliError> {
        match self.subcommand {
            Subcommand::TheoremDemo => {
                if let Some(delta) = self.opt_f64("delta")? {
                    let eps = self.f64("eps")?;
                    if delta >= eps / 6.0 {
                        return Err(CliError::Config(format!("delta = {delta} must be < eps/6 = {}", eps / 6.0)));
                    }
                }
            }
            Subcommand::Classify => {
                for e in self.list_str("experiments") {
                    if !["basin", "attracting", "classical", "operational"].contains(&e.as_str()) {
                        return Err(CliError::Config(format!("unknown experiment '{e}'")));
                    }
                }
            }
            Subcommand::EmitPlotdata => {
                if self.list_str("inputs").is_empty() {
                    return Err(CliError::Config("emit-plotdata needs at least one input".into()));
                }
                let name = self.str("name");
                if name.is_empty() || name.contains(['/', '\\']) {
                    return Err(CliError::Config("name must be a plain file stem".into()));
                }
            }
            Subcommand::Counterexample if self.f64("step")? > self.f64("grid")? => {
                return Err(CliError::Config("step must not exceed grid".into()));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn str(&self, k: &str) -> &str {
        self.values.get(k).map(String::as_str).unwrap_or("")
    }

    fn parse_err(&self, k: &str) -> CliError {
        CliError::Config(format!("{k}: bad value '{}'", self.str(k)))
    }

    pub fn opt_f64(&self, k: &str) -> Result<Option<f64>, CliError> {
        match self.str(k) {
            "" => Ok(None),
            v => v.parse().map(Some).map_err(|_| self.parse_err(k)),
        }
    }

    pub fn f64(&self, k: &str) -> Result<f64, CliError> {
        self.opt_f64(k)?.ok_or_else(|| self.parse_err(k))
    }

    pub fn opt_usize(&self, k: &str) -> Result<Option<usize>, CliError> {
        match self.str(k) {
            "" => Ok(None),
            v => v.parse().map(Some).map_err(|_| self.parse_err(k)),
        }
    }

    pub fn usize(&self, k: &str) -> Result<usize, CliError> {
        self.opt_usize(k)?.ok_or_else(|| self.parse_err(k))
    }

    pub fn u64(&self, k: &str) -> Result<u64, CliError> {
        self.str(k).parse().map_err(|_| self.parse_err(k))
    }

    pub fn list_f64(&self, k: &str) -> Result<Vec<f64>, CliError> {
        match self.str(k) {
            "" => Ok(Vec::new()),
            v => parse_list(v).map_err(|e| CliError::Config(format!("{k}: {e}"))),
        }
    }

    pub fn list_str(&self, k: &str) -> Vec<String> {
        self.str(k).split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
    }

    pub fn zoo_params(&self) -> Result<ergokit::systems::ZooParams, CliError> {
        let mut p = ergokit::systems::ZooParams::default();
        if let Some(y) = self.opt_f64("y0")? {
            p.y0 = y;
        }
        if let Some(s) = self.opt_f64("rotation_speed")? {
            p.rotation_speed = s;
        }
        if let Some(d) = self.opt_usize("identity_dim")? {
            p.identity_dim = d;
        }
        if let Some(g) = self.opt_usize("field_grid")? {
            p.field_grid = g;
        }
        Ok(p)
    }
}
