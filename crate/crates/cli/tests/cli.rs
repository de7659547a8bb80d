//! End-to-end behaviour of the `ergokit` binary.

use std::fs;
use std::path::Path;
use std::process::Command;

use ergokit::classify::SeriesRecord;
use ergokit::coarse::{read_centers_csv, read_cehyp_csv};
use ergokit::systems::zoo::annulus;
use ergokit::systems::{build_system, ZooParams};
use ergokit::ParticleMeasure;
use ergokit_cli::commands::plotdata::parse_merged;
use ergokit_cli::commands::simulate::read_trajectory_csv;
use ergokit_cli::commands::Table;
use ergokit_cli::manifest::RunManifest;

fn ergokit(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ergokit")).current_dir(dir).args(args).env_remove("ERGOKIT_OUT").output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into(), String::from_utf8_lossy(&out.stderr).into())
}

fn read(p: impl AsRef<Path>) -> String {
    fs::read_to_string(p).unwrap()
}

fn summary_row<'a>(t: &'a Table, experiment: &str) -> &'a Vec<String> {
    let j = t.header.iter().position(|h| h == "experiment").unwrap();
    t.rows.iter().find(|r| r[j] == experiment).unwrap()
}

fn converged(t: &Table, experiment: &str) -> bool {
    let j = t.header.iter().position(|h| h == "converged").unwrap();
    summary_row(t, experiment)[j] == "true"
}

#[test]
fn simulate_doubling_row_count() {
    let d = tempfile::tempdir().unwrap();
    let (code, _, err) = ergokit(d.path(), &["simulate", "--system", "doubling", "--x0", "0.1", "--steps", "5", "--out", "o"]);
    assert_eq!(code, 0, "{err}");
    let (t, p) = read_trajectory_csv(&read(d.path().join("o/trajectory.csv"))).unwrap();
    assert_eq!(t.len(), 6);
    assert_eq!(p[1].0, vec![0.2]);
    assert!(d.path().join("o/manifest.json").exists());
}

#[test]
fn simulate_counterexample_fiber_decreases() {
    let d = tempfile::tempdir().unwrap();
    let (code, _, err) =
        ergokit(d.path(), &["simulate", "--system", "counterexample", "--y0", "0.2", "--t-max", "10", "--snapshot-times", "5,1", "--out", "o"]);
    assert_eq!(code, 0, "{err}");
    let (t, p) = read_trajectory_csv(&read(d.path().join("o/trajectory.csv"))).unwrap();
    assert_eq!(*t.last().unwrap(), 10.0);
    assert_eq!(p[0][2], 0.2);
    assert!(p.windows(2).all(|w| w[1][2] < w[0][2]));
    let space = build_system::<f64>("counterexample", &ZooParams::default()).unwrap().space().clone();
    for t in ["1", "5"] {
        let m = ParticleMeasure::<f64>::read_csv(fs::File::open(d.path().join(format!("o/ensemble_t{t}.csv"))).unwrap(), space.clone()).unwrap();
        assert_eq!(m.len(), 1000);
    }
}

#[test]
fn config_errors_exit_2_without_files() {
    let d = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["simulate", "--system", "lorenz", "--out", "o"],
        &["theorem-demo", "--eps", "0.3", "--delta", "0.05", "--out", "o"],
        &["simulate", "--steps", "-1", "--out", "o"],
        &["simulate", "--system", "doubling", "--snapshot-times", "0.5", "--out", "o"],
        &["simulate", "--x0", "0.1,0.2", "--out", "o"],
        &["classify", "--experiments", "spectral", "--out", "o"],
        &["emit-plotdata", "--out", "o"],
        &["emit-plotdata", "--inputs", "missing.csv", "--out", "o"],
        &["counterexample", "--y0", "0", "--out", "o"],
        &["simulate", "--no-such-flag", "1"],
        &["simulate", "--config", "absent.cfg", "--out", "o"],
        &["--verify", "simulate", "--out", "o"],
        &[],
    ];
    for args in cases {
        let (code, _, _) = ergokit(d.path(), args);
        assert_eq!(code, 2, "{args:?}");
        assert!(!d.path().join("o").exists(), "{args:?}");
    }
    assert_eq!(ergokit(d.path(), &["--help"]).0, 0);
    assert_eq!(ergokit(d.path(), &["simulate", "--help"]).0, 0);
}

#[test]
fn config_file_layers_under_flags() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("run.cfg"), "# doubling run\nsystem = doubling\nx0 = 0.1\nsteps = 9\n").unwrap();
    let (code, _, err) = ergokit(d.path(), &["simulate", "--config", "run.cfg", "--steps", "3", "--out", "o"]);
    assert_eq!(code, 0, "{err}");
    let (t, _) = read_trajectory_csv(&read(d.path().join("o/trajectory.csv"))).unwrap();
    assert_eq!(t.len(), 4);
    let m = RunManifest::load(&d.path().join("o/manifest.json")).unwrap();
    assert_eq!(m.config["steps"], "3");
    assert_eq!(m.config["system"], "doubling");
}

#[test]
fn output_root_from_environment_and_locking() {
    let d = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ergokit")).current_dir(d.path()).env("ERGOKIT_OUT", "root").args(["cover"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(d.path().join("root/cover/centers.csv").exists());
    fs::create_dir_all(d.path().join("busy")).unwrap();
    fs::write(d.path().join("busy/.ergokit.lock"), "1").unwrap();
    let (code, _, err) = ergokit(d.path(), &["cover", "--out", "busy"]);
    assert_eq!(code, 3);
    assert!(err.contains("locked"));
}

#[test]
fn cover_outputs_round_trip() {
    let d = tempfile::tempdir().unwrap();
    let (code, _, err) = ergokit(d.path(), &["cover", "--system", "doubling_contract", "--tau", "2", "--delta", "0.05", "--out", "o"]);
    assert_eq!(code, 0, "{err}");
    let centers = read_centers_csv::<f64, _>(fs::File::open(d.path().join("o/centers.csv")).unwrap(), &annulus()).unwrap();
    let side: serde_json::Value = serde_json::from_str(&read(d.path().join("o/cover.json"))).unwrap();
    assert_eq!(side["n_centers"].as_u64().unwrap() as usize, centers.len());
    assert_eq!(side["coverage_violations"], 0);
    let a = Table::parse(&read(d.path().join("o/assignments.csv"))).unwrap();
    assert_eq!(a.rows.len(), 500);
    assert!(a.column_f64("distance").unwrap().iter().all(|v| *v < 0.1));
}

#[test]
fn classify_verdicts() {
    let d = tempfile::tempdir().unwrap();
    let (code, _, err) = ergokit(d.path(), &["classify", "--experiments", "attracting", "--out", "dc"]);
    assert_eq!(code, 0, "{err}");
    let t = Table::parse(&read(d.path().join("dc/summary.csv"))).unwrap();
    assert!(converged(&t, "attracting"));

    let (code, _, err) = ergokit(d.path(), &["classify", "--system", "rotation", "--experiments", "attracting", "--out", "rot"]);
    assert_eq!(code, 0, "{err}");
    let t = Table::parse(&read(d.path().join("rot/summary.csv"))).unwrap();
    assert!(!converged(&t, "attracting"));

    let (code, _, err) = ergokit(
        d.path(),
        &["classify", "--system", "identity", "--experiments", "classical", "--corr-n", "5000", "--n-ref", "1000", "--out", "id"],
    );
    assert_eq!(code, 0, "{err}");
    let s = SeriesRecord::<f64>::read_csv(fs::File::open(d.path().join("id/classical.csv")).unwrap()).unwrap();
    assert_eq!(s.len(), 16);
    assert!(s.values().iter().all(|v| *v == s.values()[0]));
    let se = SeriesRecord::<f64>::read_csv(fs::File::open(d.path().join("id/classical_stderr.csv")).unwrap()).unwrap();
    assert_eq!(se.times(), s.times());
}

#[test]
fn emit_plotdata_grids() {
    let d = tempfile::tempdir().unwrap();
    let w = |name: &str, t: &[f64], v: &[f64]| {
        let mut buf = Vec::new();
        SeriesRecord::new(name, t.to_vec(), v.to_vec()).unwrap().write_csv(&mut buf).unwrap();
        fs::write(d.path().join(name), buf).unwrap();
    };
    w("a.csv", &[0.0, 1.0, 2.0], &[1.0, 2.0, 3.0]);
    w("b.csv", &[0.0, 1.0, 2.0], &[4.0, 5.0, 6.0]);
    w("c.csv", &[0.5, 2.0], &[7.0, 8.0]);
    let (code, _, err) = ergokit(d.path(), &["emit-plotdata", "--inputs", "a.csv,b.csv", "--name", "same", "--out", "o"]);
    assert_eq!(code, 0, "{err}");
    let text = read(d.path().join("o/same.dat"));
    assert!(text.lines().skip(1).all(|l| l.split_whitespace().count() == 3));
    assert!(read(d.path().join("o/same.svg")).starts_with("<svg"));
    let (code, _, err) = ergokit(d.path(), &["emit-plotdata", "--inputs", "a.csv,c.csv", "--name", "union", "--out", "o2"]);
    assert_eq!(code, 0, "{err}");
    let (_, rows) = parse_merged(&read(d.path().join("o2/union.dat"))).unwrap();
    assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), vec![0.0, 0.5, 1.0, 2.0]);
    assert_eq!(rows[1].1, vec![None, Some(7.0)]);
    assert_eq!(rows[3].1, vec![Some(3.0), Some(8.0)]);
}

#[test]
fn theorem_demo_artifacts_round_trip() {
    let d = tempfile::tempdir().unwrap();
    let (code, _, err) = ergokit(
        d.path(),
        &["theorem-demo", "--n-particles", "4000", "--n-mu", "20000", "--n-mc", "2000", "--tau-list", "1,3", "--out", "o"],
    );
    assert_eq!(code, 0, "{err}");
    let o = d.path().join("o");
    let coarse = ParticleMeasure::<f64>::read_csv(fs::File::open(o.join("coarse.csv")).unwrap(), annulus()).unwrap();
    assert!((coarse.total_mass() - 1.0).abs() < 1e-9);
    let rows = read_cehyp_csv::<f64, _>(fs::File::open(o.join("cehyp.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.1 > 0.0 && r.2 == 0));
    let cmp = Table::parse(&read(o.join("comparison.csv"))).unwrap();
    assert_eq!(cmp.rows.len(), 31);
    for name in ["gap_coarse.csv", "gap_mu.csv"] {
        SeriesRecord::<f64>::read_csv(fs::File::open(o.join(name)).unwrap()).unwrap();
    }
    let summary: serde_json::Value = serde_json::from_str(&read(o.join("summary.json"))).unwrap();
    assert_eq!(summary["conclusion_holds"], true);
    assert!(summary["lemma_checks"].as_array().unwrap().iter().all(|c| c["ok"] == true));
}

#[test]
fn counterexample_outputs() {
    let d = tempfile::tempdir().unwrap();
    let (code, _, err) = ergokit(d.path(), &["counterexample", "--quadrature-n", "20000", "--fiber-n", "500", "--out", "o"]);
    assert_eq!(code, 0, "{err}");
    let o = d.path().join("o");
    for k in 0..4 {
        let s = SeriesRecord::<f64>::read_csv(fs::File::open(o.join(format!("discrepancy_{k}.csv"))).unwrap()).unwrap();
        assert!(s.max_abs() <= 1e-6);
    }
    let c = Table::parse(&read(o.join("concentration.csv"))).unwrap();
    assert!(c.column("within").unwrap().iter().all(|v| *v == "true"));
    let summary: serde_json::Value = serde_json::from_str(&read(o.join("summary.json"))).unwrap();
    let b = summary["reference_bound"]["value"].as_f64().unwrap();
    assert!((b - 1.6e-4).abs() < 0.05e-4, "{b}");
    let decay = SeriesRecord::<f64>::read_csv(fs::File::open(o.join("fiber_decay.csv")).unwrap()).unwrap();
    assert!(decay.values().windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn manifest_rerun_verifies_hashes() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(ergokit(d.path(), &["simulate", "--snapshot-times", "3", "--out", "a"]).0, 0);
    let (code, out, err) = ergokit(d.path(), &["--manifest", "a/manifest.json", "--verify", "--out", "b"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("verified"));
    let (code, _, _) = ergokit(d.path(), &["simulate", "--manifest", "a/manifest.json", "--verify", "--seed", "2", "--out", "c"]);
    assert_eq!(code, 3);
    let (code, _, _) = ergokit(d.path(), &["cover", "--manifest", "a/manifest.json", "--out", "e"]);
    assert_eq!(code, 2);
}
