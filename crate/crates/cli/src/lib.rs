//! Batch front-end for ergokit experiments.
//!
//! Every run resolves a flat configuration (defaults, optional config file,
//! flags), validates it before touching the file system, writes its outputs
//! into a locked directory and records them with SHA-256 hashes in
//! `manifest.json`. Re-running from a manifest reproduces the same bytes.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime failure.

// `!(a < b)` is deliberate: NaN must fail every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Arg, ArgAction, ArgMatches, Command};

pub mod commands;
pub mod config;
pub mod manifest;

use config::{read_config_file, RunConfig, Subcommand, SUBCOMMANDS};
use manifest::RunManifest;

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "ERGOKIT_OUT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ergokit::Error> for CliError {
    fn from(e: ergokit::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub fn cli() -> Command {
    let mut cmd = Command::new("ergokit")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Numerical ergodic theory on particle ensembles")
        .arg(Arg::new("config").long("config").global(true).value_name("FILE").help("flat key = value configuration file"))
        .arg(Arg::new("out").long("out").global(true).value_name("DIR").help(format!("output directory (default ${OUT_ENV}/<subcommand>)")))
        .arg(Arg::new("manifest").long("manifest").global(true).value_name("FILE").help("re-run the configuration recorded in a manifest"))
        .arg(Arg::new("verify").long("verify").global(true).action(ArgAction::SetTrue).help("with --manifest: fail unless every output hash matches"))
        .arg(
            Arg::new("threads")
                .long("threads")
                .global(true)
                .value_name("N")
                .value_parser(clap::value_parser!(usize))
                .help("worker threads (results do not depend on it)"),
        );
    for sub in SUBCOMMANDS {
        let mut sc = Command::new(sub.name()).about(sub.about());
        for key in sub.keys() {
            let help = if key.default.is_empty() { key.help.to_string() } else { format!("{} [default: {}]", key.help, key.default) };
            sc = sc.arg(Arg::new(key.name).long(key.flag()).value_name("VALUE").allow_hyphen_values(true).help(help));
        }
        cmd = cmd.subcommand(sc);
    }
    cmd
}

fn flag_layer(sub: Subcommand, m: &ArgMatches) -> Vec<(String, String)> {
    sub.keys()
        .iter()
        .filter_map(|k| m.get_one::<String>(k.name).map(|v| (k.name.to_string(), v.clone())))
        .collect()
}

/// Output directory: `--out`, else `$ERGOKIT_OUT/<subcommand>`, else `ergokit-out/<subcommand>`.
pub fn output_dir(explicit: Option<&String>, sub: Subcommand) -> PathBuf {
    match explicit {
        Some(d) => PathBuf::from(d),
        None => std::env::var_os(OUT_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("ergokit-out"))
            .join(sub.name()),
    }
}

struct Invocation {
    cfg: RunConfig,
    out: PathBuf,
    verify_against: Option<RunManifest>,
}

fn plan(m: &ArgMatches) -> Result<Invocation, CliError> {
    let manifest = m.get_one::<String>("manifest").map(|p| RunManifest::load(Path::new(p))).transpose()?;
    let (sub, sub_m) = match m.subcommand() {
        Some((name, sm)) => (Subcommand::parse(name).expect("registered subcommand"), Some(sm)),
        None => match &manifest {
            Some(man) => (man.subcommand()?, None),
            None => return Err(CliError::Config("no subcommand given (see --help)".into())),
        },
    };
    let mut layers = Vec::new();
    if let Some(man) = &manifest {
        if man.subcommand()? != sub {
            return Err(CliError::Config(format!("manifest is for '{}', not '{sub}'", man.subcommand)));
        }
        layers.push(man.config_layer());
    }
    let global = sub_m.unwrap_or(m);
    if let Some(path) = global.get_one::<String>("config") {
        layers.push(read_config_file(Path::new(path))?);
    }
    if let Some(sm) = sub_m {
        layers.push(flag_layer(sub, sm));
    }
    if global.get_flag("verify") && manifest.is_none() {
        return Err(CliError::Config("--verify needs --manifest".into()));
    }
    let cfg = RunConfig::resolve(sub, &layers)?;
    let out = output_dir(global.get_one::<String>("out"), sub);
    let verify_against = if global.get_flag("verify") { manifest } else { None };
    Ok(Invocation { cfg, out, verify_against })
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let m = match cli().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let threads = m.subcommand().and_then(|(_, sm)| sm.get_one::<usize>("threads")).or(m.get_one::<usize>("threads")).copied();
    if let Some(n) = threads {
        if n == 0 {
            eprintln!("{}", CliError::Config("--threads must be >= 1".into()));
            return EXIT_CONFIG;
        }
        // the global pool can only be set once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match plan(&m).and_then(|inv| execute(&inv)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("ergokit: {e}");
            e.exit_code()
        }
    }
}

fn execute(inv: &Invocation) -> Result<(), CliError> {
    let cfg = &inv.cfg;
    let manifest = commands::run(cfg, &inv.out)?;
    let seed = cfg.values.get("seed").map(|s| format!(" seed {s} |")).unwrap_or_default();
    println!("{}:{seed} {} files in {}", cfg.subcommand, manifest.outputs.len(), inv.out.display());
    if let Some(reference) = &inv.verify_against {
        let bad = manifest.mismatches(reference);
        if !bad.is_empty() {
            return Err(CliError::Runtime(format!("hash mismatch against manifest: {}", bad.join(", "))));
        }
        println!("verified {} output hashes", manifest.outputs.len());
    }
    Ok(())
}
