use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use spikezo::optimizers::Method;
use spikezo::spiking::TopologySpec;
use spikezo::verification::DivergenceConfig;
use spikezo_cli::commands::optimize::OptimizeConfig;
use spikezo_cli::commands::spike_demo::{SpikeDemoConfig, TopologySource};
use spikezo_cli::commands::sweep::SweepConfig;
use spikezo_cli::commands::verify::{CheckSpec, VerifyConfig};
use spikezo_cli::config::parse;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn read<T: serde::de::DeserializeOwned>(name: &str) -> T {
    parse(&fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

fn spikezo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spikezo")).args(args).output().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn fixtures_match_built_in_defaults() {
    assert_eq!(read::<OptimizeConfig>("optimize_bnn.json"), OptimizeConfig::pinned());
    assert_eq!(read::<SweepConfig>("sweep_variance.json"), SweepConfig::pinned());
    assert_eq!(read::<VerifyConfig>("verify_default.json"), VerifyConfig::default_suite());

    let mut demo: SpikeDemoConfig = read("spike_demo.json");
    assert_eq!(demo.topology, TopologySource::Path("topology_3in_1out.json".into()));
    demo.topology = TopologySource::Inline(read::<TopologySpec>("topology_3in_1out.json"));
    assert_eq!(demo, SpikeDemoConfig::pinned());

    let divergence: VerifyConfig = read("divergence.json");
    let pinned = DivergenceConfig::pinned();
    assert_eq!(
        divergence.checks,
        vec![CheckSpec::Divergence {
            dim: pinned.dim,
            init: pinned.init,
            alpha: pinned.alpha,
            sigma2: pinned.sigma2,
            iterations: pinned.iterations,
            seed: pinned.seed,
        }]
    );
}

#[test]
fn every_fixture_validates() {
    let compare: OptimizeConfig = read("optimize_compare.json");
    compare.validate().unwrap();
    let names: Vec<_> = compare.methods.iter().map(Method::name).collect();
    assert_eq!(names, ["gd", "bnn", "one-point"]);
    read::<SweepConfig>("sweep_single.json").validate().unwrap();
    for name in ["spike_demo_rescaled.json", "spike_demo_loss.json"] {
        read::<SpikeDemoConfig>(name);
    }
}

#[test]
fn nonpositive_half_interval_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{
        "problem": {"kind": "least-squares", "target": [1.0, 2.0]},
        "methods": [{"method": "bnn", "half_interval": 0.0}],
        "schedule": {"kind": "constant", "alpha0": 0.01},
        "iterations": 5
    }"#;
    let path = write(dir.path(), "bad.json", cfg);
    let out_csv = dir.path().join("trace.csv");
    let out = spikezo(&["optimize", "--config", &path, "--out", out_csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("half_interval must be positive"), "{}", stderr(&out));
    assert!(!out_csv.exists());
}

#[test]
fn cyclic_topology_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: serde_json::Value = read("spike_demo.json");
    cfg["topology"] = serde_json::Value::String(fixture("topology_cyclic.json").to_str().unwrap().into());
    cfg["weights"] = serde_json::json!([1.0, 1.0, 1.0, 1.0]);
    cfg["inputs"] = serde_json::json!([[0.0]]);
    let path = write(dir.path(), "cyclic.json", &cfg.to_string());
    let out = spikezo(&["spike-demo", "--config", &path, "--out", dir.path().join("s.csv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("topology"), "{}", stderr(&out));
}

#[test]
fn unknown_field_and_missing_file_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "sweep.json", r#"{"dims": [10], "sigma2": 1.0, "n": 100, "colour": 3}"#);
    assert_eq!(spikezo(&["sweep", "--config", &path]).status.code(), Some(2));
    let missing = dir.path().join("nope.json");
    assert_eq!(spikezo(&["verify", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn zero_iterations_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: serde_json::Value = read("optimize_compare.json");
    cfg["iterations"] = 0.into();
    let path = write(dir.path(), "zero.json", &cfg.to_string());
    let csv = dir.path().join("trace.csv");
    let out = spikezo(&["optimize", "--config", &path, "--out", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(fs::read_to_string(&csv).unwrap(), "method,replicate,iter,loss,theta_norm\n");
}

#[test]
fn single_dimension_sweep_reports_insufficient_points() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = spikezo(&["sweep", "--config", fixture("sweep_single.json").to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sweep.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "insufficient points");
    assert!(summary["slope"].is_null());
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 2);
}

#[test]
fn diverging_method_keeps_partial_trace_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: serde_json::Value = read("optimize_compare.json");
    cfg["methods"] = serde_json::json!([{"method": "gd"}, {"method": "one-point", "sigma2": 0.01}]);
    cfg["schedule"]["alpha0"] = 0.005.into();
    let path = write(dir.path(), "blowup.json", &cfg.to_string());
    let csv = dir.path().join("trace.csv");
    let out = spikezo(&["optimize", "--config", &path, "--out", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("method one-point"), "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.lines().any(|l| l.starts_with("gd,")));
    assert!(text.lines().any(|l| l.starts_with("one-point,")));
}

#[test]
fn failing_check_exits_one_with_report() {
    let dir = tempfile::tempdir().unwrap();
    // a far too tight relative criterion on a Monte Carlo mean
    let cfg = r#"{"checks": [{"check": "theorem1", "loss": {"kind": "least-squares", "target": [1.0]},
        "theta": [0.0], "half_interval": 1.0, "alpha": 1.0, "n": 10000, "quadrature": true,
        "criterion": {"kind": "relative", "rel": 1e-9}}]}"#;
    let path = write(dir.path(), "tight.json", cfg);
    let report = dir.path().join("report.json");
    let out = spikezo(&["verify", "--config", &path, "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(report["pass"], false);
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn seed_flag_changes_output_and_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, name: &str| {
        let csv = dir.path().join(name);
        let out = spikezo(&["spike-demo", "--config", fixture("spike_demo.json").to_str().unwrap(), "--seed", seed, "--out", csv.to_str().unwrap()]);
        assert!(out.status.success(), "{}", stderr(&out));
        fs::read_to_string(csv).unwrap()
    };
    assert_ne!(run("1", "a.csv"), run("2", "b.csv"));
    assert_eq!(run("1", "c.csv"), run("1", "d.csv"));
}

#[test]
fn spike_demo_rows_cover_every_edge() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("demo.csv");
    let out = spikezo(&["spike-demo", "--config", fixture("spike_demo_loss.json").to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("trial,edge_or_neuron,kind,value"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    for trial in ["0", "1", "2", "3"] {
        let weights = rows.iter().filter(|r| r[0] == trial && r[2] == "weight").count();
        assert_eq!(weights, 6);
        assert_eq!(rows.iter().filter(|r| r[0] == trial && r[2] == "loss").count(), 1);
    }
    // trial 0 has a zero loss delta, so the loss-modulated rule leaves the weights alone
    assert!(rows.iter().filter(|r| r[0] == "0" && r[2] == "weight").all(|r| r[3] == "1.5"));
}
