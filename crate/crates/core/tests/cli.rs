// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! End-to-end runs of the `qsh` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qsh_core::io::{parse_config_str, run, RunOptions};
use serde_json::Value;

fn qsh(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsh"))
        .args(args)
        .env("QSH_CACHE_DIR", cache)
        .env("RUST_LOG", "error")
        .output()
        .expect("qsh runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn edge_states_run_is_cached_and_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let cfg = write(dir.path(), "edge.json", r#"{"model":{"alpha":"1/3"},"edge_states":{"fermi_energy":1.5}}"#);
    let out = dir.path().join("out");
    let out_s = out.to_string_lossy();

    let first = qsh(&["edge-states", "--config", &cfg, "--out", &out_s], &cache);
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let density = fs::read(out.join("density.csv")).unwrap();
    let states = fs::read(out.join("states.csv")).unwrap();

    let text = String::from_utf8(density.clone()).unwrap();
    let rows: Vec<(usize, usize, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 36);
    let total: f64 = rows.iter().map(|r| r.2).sum();
    let perimeter: f64 = rows.iter().filter(|(m, n, _)| *m == 1 || *n == 1 || *m == 6 || *n == 6).map(|r| r.2).sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert!(perimeter / total >= 0.8, "perimeter share {}", perimeter / total);

    let second = qsh(&["edge-states", "--config", &cfg, "--out", &out_s], &cache);
    assert_eq!(code(&second), 0);
    assert!(String::from_utf8_lossy(&second.stdout).contains("cached"));
    assert_eq!(fs::read(out.join("density.csv")).unwrap(), density);
    assert_eq!(fs::read(out.join("states.csv")).unwrap(), states);

    let manifest: Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["cache"], "hit");
    assert!(cache.join(manifest["config_sha256"].as_str().unwrap()).is_dir());
    for f in manifest["files"].as_array().unwrap() {
        let bytes = fs::read(out.join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(f["bytes"].as_u64().unwrap() as usize, bytes.len());
    }

    let forced = dir.path().join("forced");
    let third = qsh(&["edge-states", "--config", &cfg, "--out", &forced.to_string_lossy(), "--force"], &cache);
    assert_eq!(code(&third), 0);
    assert!(String::from_utf8_lossy(&third.stdout).contains("computed"));
    assert_eq!(fs::read(forced.join("density.csv")).unwrap(), density);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let out = dir.path().join("out");
    let out_s = out.to_string_lossy();
    let cases = [
        (r#"{"alpha":"1/3","bands":{},"ribbon":{}}"#, "bands", "exactly one task block"),
        (r#"{"alpha":"1/3","task":"bands","grid":[8,8]}"#, "bands", "bands.grid"),
        (r#"{"alpha":"1/3","task":"ribbon"}"#, "bands", "requested"),
        (r#"{"alpha":"1/3", "task":"#, "bands", "line 1"),
        (r#"{"alpha":"1/3","nx":9,"task":"lindblad"}"#, "lindblad", "master-equation lattice"),
    ];
    for (i, (text, cmd, needle)) in cases.iter().enumerate() {
        let cfg = write(dir.path(), &format!("c{i}.json"), text);
        let o = qsh(&[cmd, "--config", &cfg, "--out", &out_s], &cache);
        let err = String::from_utf8_lossy(&o.stderr);
        assert_eq!(code(&o), 2, "{text}: {err}");
        assert!(err.contains(needle), "{text}: {err}");
    }
    let missing = qsh(&["bands", "--config", "/nonexistent/qsh.json"], &cache);
    assert_eq!(code(&missing), 2);
}

#[test]
fn computation_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // λ = -75 t0 brings a vertical up-up transition to zero frequency.
    let cfg = write(dir.path(), "tones.json", r#"{"alpha":"1/3","lambda":-75,"task":"tones"}"#);
    let o = qsh(&["tones", "--config", &cfg, "--out", &dir.path().join("out").to_string_lossy()], &dir.path().join("c"));
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("degeneracy"));
}

#[test]
fn flux_is_normalized_and_json_output_parses() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.json", r#"{"alpha":"2/6","task":"tones","physical_units":true}"#);
    let out = dir.path().join("out");
    let o = qsh(&["tones", "--config", &cfg, "--out", &out.to_string_lossy(), "--format", "json", "--threads", "1"], &dir.path().join("c"));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["model"]["alpha"], "1/3");
    assert_eq!(manifest["threads"], 1);
    assert!(manifest["warnings"][0].as_str().unwrap().contains("normalized"));
    let table: Value = serde_json::from_slice(&fs::read(out.join("tones.json")).unwrap()).unwrap();
    let rows = table["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    let x = &rows[0];
    assert_eq!(x["bond"], "1-2x");
    assert_eq!(x["freq_MHz"].as_f64().unwrap(), 3.0 * x["freq_t0"].as_f64().unwrap());
}

#[test]
fn library_runner_serves_repeat_runs_from_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config_str(r#"{"alpha":"1/3","task":"ribbon","rows":12,"kx_points":101}"#).unwrap();
    let opts = RunOptions { out_dir: dir.path().join("out"), force: false, cache_dir: Some(dir.path().join("out/.qsh-cache")) };
    let a = run(&cfg, &opts).unwrap();
    let b = run(&cfg, &opts).unwrap();
    assert!(!a.cache_hit && b.cache_hit);
    let csv = fs::read_to_string(dir.path().join("out/ribbon.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 101 * 24);
    assert!(csv.starts_with("kx,band_index,E_t0,bottom_weight,top_weight\n"));
}
