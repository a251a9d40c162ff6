//! End-to-end checks of the `schrodinger-lab` binary.

use schrodinger_lab::field::GridSpec;
use schrodinger_lab::io::{read_field, read_scaling_csv, write_initial, FieldFile, RunDirectory, COMPLETION_MARKER};
use schrodinger_lab::partition::MassField;
use schrodinger_lab::wavepacket::reference_gaussian;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schrodinger-lab"))
        .arg("--out")
        .arg(dir.join("out"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn unknown_experiment_exits_2_with_a_json_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(dir.path(), &["run", "no_such_law"]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["kind"], "unknown_experiment");
    assert!(!dir.path().join("out/no_such_law").exists());
}

#[test]
fn empty_inputs_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty");
    fs::write(&empty, b"").unwrap();
    for cmd in ["decompose", "propagate"] {
        assert_eq!(lab(dir.path(), &[cmd, empty.to_str().unwrap()]).status.code(), Some(3), "{cmd}");
    }
    let out = lab(dir.path(), &["partition", empty.to_str().unwrap(), "--degree", "2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sigma_law_run_is_reproducible_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    let first = lab(dir.path(), &["--seed", "5", "run", "sigma_law"]);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let summary = stdout_json(&first);
    assert_eq!(summary["rows"], 5);
    let run = dir.path().join("out/sigma_law");
    let csv = fs::read(run.join("sigma_law.csv")).unwrap();
    assert!(csv.starts_with(b"R,sigma_or_N,M,E,norm,ratio,fitted_slope\n"));
    assert_eq!(read_scaling_csv(csv.as_slice()).unwrap().len(), 5);
    assert!(fs::read_to_string(run.join("sigma_law.svg")).unwrap().contains("ln_x,ln_y"));
    let manifest = RunDirectory::open(&run).unwrap().read_manifest().unwrap();
    assert_eq!(manifest.seed, 5);
    assert!(manifest.fit.is_some() && manifest.tolerances.contains_key("slope_target"));
    assert!(run.join(COMPLETION_MARKER).is_file());

    let second = lab(dir.path(), &["--seed", "5", "run", "sigma_law"]);
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(fs::read(run.join("sigma_law.csv")).unwrap(), csv);
}

#[test]
fn config_file_values_yield_to_command_line_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("lab.conf");
    fs::write(&config, "# crossing sweep\ndegrees = 2, 3, 4\ntrials = 40\nseed = 1\n").unwrap();
    let out = lab(dir.path(), &["--config", config.to_str().unwrap(), "--seed", "9", "run", "crossing_bound", "--set", "trials=10"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("out/crossing_bound");
    let manifest = RunDirectory::open(&run).unwrap().read_manifest().unwrap();
    assert_eq!(manifest.seed, 9);
    assert_eq!(manifest.config["trials"], "10");
    assert_eq!(manifest.grid["trials"], 10);
    assert_eq!(manifest.grid["degrees"], serde_json::json!([2, 3, 4]));

    let bad = lab(dir.path(), &["run", "sigma_law", "--set", "epsilon=0.2", "--set", "delta=0.1"]);
    assert_eq!(bad.status.code(), Some(1));
    let allowed = lab(dir.path(), &["run", "crossing_bound", "--set", "epsilon=0.2", "--set", "delta=0.1", "--set", "trials=5", "--override-delta"]);
    assert_eq!(allowed.status.code(), Some(0));
}

#[test]
fn report_flags_an_interrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(lab(dir.path(), &["run", "crossing_bound", "--set", "trials=5"]).status.code(), Some(0));
    let run = dir.path().join("out/crossing_bound");
    let done = lab(dir.path(), &["report", run.to_str().unwrap()]);
    assert_eq!(done.status.code(), Some(0));
    assert_eq!(stdout_json(&done)["complete"], true);
    fs::remove_file(run.join(COMPLETION_MARKER)).unwrap();
    let cut = lab(dir.path(), &["report", run.to_str().unwrap()]);
    assert_eq!(cut.status.code(), Some(1));
    assert_eq!(stdout_json(&cut)["complete"], false);
}

#[test]
fn decompose_and_propagate_a_serialized_gaussian() {
    let dir = tempfile::tempdir().unwrap();
    let grid = GridSpec::standard(1, 256.0).unwrap();
    let f = reference_gaussian(&grid);
    let path = dir.path().join("gauss.bin");
    let mut bytes = Vec::new();
    write_initial(&mut bytes, &f).unwrap();
    fs::write(&path, bytes).unwrap();

    let out = lab(dir.path(), &["decompose", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = stdout_json(&out);
    assert!(summary["round_trip_error"].as_f64().unwrap() <= 1e-6);
    let lines = fs::read_to_string(dir.path().join("out/gauss.coeffs.jsonl")).unwrap();
    assert_eq!(lines.lines().count() as u64, summary["coefficients"].as_u64().unwrap());

    let out = lab(dir.path(), &["propagate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_json(&out)["unitarity_drift"].as_f64().unwrap() <= 1e-10);
    let evolved = fs::read(dir.path().join("out/gauss.evolved.bin")).unwrap();
    match read_field(&mut evolved.as_slice()).unwrap() {
        FieldFile::Evolved(u) => assert_eq!(u.nt(), grid.nt),
        FieldFile::Initial(_) => panic!("expected a solution container"),
    }
}

#[test]
fn partition_writes_balanced_cells() {
    let dir = tempfile::tempdir().unwrap();
    let w = MassField::on_box(1, 64.0, 64.0, 64, 1024, |x, t| 1.0 + x[0].abs() + t).unwrap();
    let path = dir.path().join("mass.json");
    fs::write(&path, serde_json::to_string(&w).unwrap()).unwrap();
    let out = lab(dir.path(), &["partition", path.to_str().unwrap(), "--degree", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = stdout_json(&out);
    assert_eq!(summary["cells"], 4);
    for share in summary["shares"].as_array().unwrap() {
        assert!((share.as_f64().unwrap() - 0.25).abs() < 1e-3);
    }
    let file: schrodinger_lab::io::PartitionFile =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/mass.partition.json")).unwrap()).unwrap();
    assert_eq!(file.cells().unwrap().len(), 4);
}
