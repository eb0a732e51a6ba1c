use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use quasilab::algebra::{parse_qvalues, AlgebraSpec, QValue};
use quasilab::dynamics::discrepancy_trace;
use quasilab::lattice::make_special_lattice;
use quasilab::modelset::{cut_and_project, dual_model_points, PointSet, SearchBox};
use quasilab::regions::RegionSet;
use quasilab::riesz::riesz_bound_trace;

fn quasilab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quasilab")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn q2(text: &str) -> Vec<QValue> {
    parse_qvalues(&AlgebraSpec::quadratic(2).unwrap(), text).unwrap()
}

fn example_points(range: i64) -> PointSet {
    let alg = AlgebraSpec::quadratic(2).unwrap();
    let window = RegionSet::interval_left_open(&QValue::from_int(&alg, -1), &QValue::zero(&alg)).unwrap();
    let special = make_special_lattice(&q2("w1"), &q2("1")).unwrap();
    cut_and_project(&special.gamma, &window, &SearchBox::symmetric(1, range)).unwrap()
}

fn silver_window() -> RegionSet {
    let alg = AlgebraSpec::quadratic(2).unwrap();
    RegionSet::interval(&QValue::zero(&alg), &QValue::parse(&alg, "w1 - 1").unwrap()).unwrap()
}

#[test]
fn gen_writes_the_library_point_set() {
    let dir = tempfile::tempdir().unwrap();
    let o = quasilab(
        &["gen", "--alpha", "w1", "--beta", "1", "--window", "(-1,0]", "--range", "100", "--out", "p.csv"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("p.csv")).unwrap();
    let expected = example_points(100);
    assert_eq!(expected.len(), 201);
    assert_eq!(csv, expected.to_csv());
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["points"], 201);
}

#[test]
fn gen_without_out_prints_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = quasilab(&["gen", "--alpha", "w1", "--beta", "1", "--window", "(-1,0]", "--range", "5"], dir.path());
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), example_points(5).to_csv());
}

#[test]
fn dual_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let o = quasilab(&["dual", "--alpha", "w1", "--beta", "1", "--set", "[0,w1-1)", "--range", "30"], dir.path());
    assert_eq!(code(&o), 0);
    let expected = dual_model_points(&q2("w1"), &q2("1"), &silver_window(), (-30, 30)).unwrap();
    assert_eq!(String::from_utf8(o.stdout).unwrap(), expected.to_csv());
}

#[test]
fn disc_trace_and_plot_match_library() {
    let dir = tempfile::tempdir().unwrap();
    let o = quasilab(
        &["disc", "--set", "[0,w1-1)", "--alpha", "w1", "--n", "500", "--two-sided", "--plot-dir", "plot", "--out", "d.csv"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let trace = discrepancy_trace(&silver_window(), &q2("w1"), &q2("0"), (-500, 500), true).unwrap();
    assert_eq!(fs::read_to_string(dir.path().join("d.csv")).unwrap(), trace.to_csv());
    let dat = fs::read_to_string(dir.path().join("plot/Dn.dat")).unwrap();
    let rows: Vec<&str> = dat.lines().collect();
    assert_eq!(rows.len(), 1001);
    let (n, d) = rows[700].split_once(' ').unwrap();
    assert_eq!(n.parse::<i64>().unwrap(), 200);
    assert_eq!(d.parse::<f64>().unwrap(), trace.value(200).unwrap());
    assert!(dir.path().join("plot/Dn.json").exists());
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["max_abs"].as_f64().unwrap(), trace.max_abs);
}

#[test]
fn bounds_trace_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let p = example_points(40);
    fs::write(dir.path().join("p.csv"), p.to_csv()).unwrap();
    let o = quasilab(
        &["bounds", "--points", "p.csv", "--set", "[0,1)", "--radii", "10,20", "--plot-dir", "pl", "--out", "b.csv"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let alg = AlgebraSpec::quadratic(2).unwrap();
    let s = RegionSet::interval(&QValue::zero(&alg), &QValue::one(&alg)).unwrap();
    // the CSV round trip keeps the 17-digit values
    let reread = PointSet::from_csv(&p.to_csv()).unwrap();
    let expected = riesz_bound_trace(&reread, &[10.0, 20.0], &s).unwrap();
    assert_eq!(fs::read_to_string(dir.path().join("b.csv")).unwrap(), expected.to_csv());
    let lmin = fs::read_to_string(dir.path().join("pl/lmin.dat")).unwrap();
    assert_eq!(lmin.lines().count(), 2);
    assert!(lmin.starts_with("10 "));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(&quasilab(&["gen", "--no-such-flag"], p)), 64);
    assert_eq!(code(&quasilab(&["frobnicate"], p)), 64);
    assert_eq!(code(&quasilab(&["duality", "--config", "missing.toml"], p)), 66);
    fs::write(p.join("bad.toml"), "[experiment]\nalpha = [\"w1\"]\nmystery = 3\n").unwrap();
    assert_eq!(code(&quasilab(&["report", "--config", "bad.toml"], p)), 66);
    // empty window
    assert_eq!(code(&quasilab(&["gen", "--alpha", "w1", "--beta", "1", "--window", "(0,0]", "--range", "3"], p)), 2);
    // non-positive measure
    assert_eq!(code(&quasilab(&["brs-make", "--alpha", "w1", "--gamma", "1-w1"], p)), 2);
    fs::write(
        p.join("bq.alg"),
        "basis w1 = sqrt 2\nbasis w2 = sqrt 3\nbasis w3 = sqrt 6\nproduct w1 w2 = w3\nproduct w1 w3 = 2*w2\nproduct w2 w3 = 3*w1\n",
    )
    .unwrap();
    let o = quasilab(
        &["brs-make", "--algebra", "bq.alg", "--alpha", "w1,w2", "--gamma", "5+7*w1+9*w2", "--bound", "1"],
        p,
    );
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(code(&quasilab(&["--help"], p)), 0);
}

#[test]
fn certificate_is_verified() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = quasilab(&["brs-make", "--alpha", "w1", "--edge", "1:-1", "--out", "src.region"], p);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    // [0, √2 − 1) shifted by √2 − 1 lands on [√2 − 1, 2√2 − 2)
    let target = RegionSet::parse(&fs::read_to_string(p.join("src.region")).unwrap(), &AlgebraSpec::quadratic(2).unwrap())
        .unwrap()
        .translated(&q2("w1 - 1"))
        .unwrap();
    fs::write(p.join("tgt.region"), target.to_text()).unwrap();
    fs::write(p.join("c.cert"), "alpha w1\nsource src.region\ntarget tgt.region\nshift w1 - 1\n").unwrap();
    let o = quasilab(&["brs-test", "--cert", "c.cert"], p);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["certificate"]["valid"], true);

    fs::write(p.join("bad.cert"), "alpha w1\nsource src.region\ntarget tgt.region\nshift 1/3\n").unwrap();
    let v: serde_json::Value = serde_json::from_slice(&quasilab(&["brs-test", "--cert", "bad.cert"], p).stdout).unwrap();
    assert_eq!(v["certificate"]["valid"], false);
}

const CONFIG: &str = r#"
[experiment]
alpha = ["w1"]
beta = ["1"]
window = "(-1,0]"
set = "[0,1)"
seed = 11

[ranges]
gen_range = 60
radii = [10.0, 20.0]
density_radii = [10.0]
n_max = 32
k_max = 100
disc_n = 3000
disc_j = 100
bmo_max = 256
"#;

#[test]
fn report_is_deterministic_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("exp.toml"), CONFIG).unwrap();
    for out in ["a", "b"] {
        let o = quasilab(&["report", "--config", "exp.toml", "--out-dir", out], p);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["points.csv", "dual.csv", "Dn.csv", "bounds_primal.csv", "bounds_dual.csv", "report.json", "plot/Dn.dat"] {
        let a = fs::read(p.join("a").join(f)).unwrap();
        assert_eq!(a, fs::read(p.join("b").join(f)).unwrap(), "{f} differs between runs");
    }
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(p.join("a/report.json")).unwrap()).unwrap();
    assert_eq!(report["version"], "quasilab-report/1");
    assert_eq!(report["config"]["experiment"]["seed"], 11);
    let t = report["translate"][0].as_str().unwrap();
    assert!(t.ends_with("/1000"));
    assert_eq!(report["primal"]["points"], example_points(60).len());
    assert!(report["evidence"].as_array().unwrap().len() >= 5);
    assert!(report["duality"]["avdonin"]["satisfied_at"].is_u64());
}

#[test]
fn duality_writes_paired_traces() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("exp.toml"), CONFIG).unwrap();
    let o = quasilab(&["duality", "--config", "exp.toml", "--out", "d.json"], p);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(p.join("d.json")).unwrap()).unwrap();
    assert_eq!(v["version"], "quasilab-duality/1");
    assert_eq!(v["duality"]["primal"]["rows"].as_array().unwrap().len(), 2);
    assert_eq!(v["duality"]["dual"]["rows"].as_array().unwrap().len(), 2);
}
