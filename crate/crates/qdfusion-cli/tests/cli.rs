// Copyright 2026 The qdfusion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use qdfusion::metrics::{setting_projector, STANDARD_SETTINGS};
use qdfusion::metrics::parse_setting;
use qdfusion::polarization::PolarizationState;

fn qdfusion(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdfusion")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// `quantity,value` rows of a CSV report.
fn summary(csv: &str) -> BTreeMap<String, String> {
    csv.lines()
        .skip_while(|l| *l != "quantity,value")
        .skip(1)
        .take_while(|l| !l.is_empty())
        .map(|l| {
            let (k, v) = l.split_once(',').unwrap();
            (k.to_string(), v.to_string())
        })
        .collect()
}

fn number(csv: &str, key: &str) -> f64 {
    summary(csv)[key].parse().unwrap()
}

fn table<'a>(csv: &'a str, name: &str) -> Vec<Vec<&'a str>> {
    let marker = format!("# table: {name}");
    csv.lines()
        .skip_while(|l| *l != marker)
        .skip(2)
        .take_while(|l| !l.is_empty())
        .map(|l| l.split(',').collect())
        .collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn pair_reports_reference_bound() {
    let out = qdfusion(&["pair", "--bins", "256"]);
    assert!(out.status.success());
    let csv = stdout(&out);
    assert!((number(&csv, "indistinguishability_bound") - 0.763).abs() < 1e-3);
    assert!(csv.starts_with("# command: pair\n"));
    assert!(csv.contains("# seed: 0"));
    assert!(csv.contains("# config: [cascade]"));
    assert!(table(&csv, "temporal_intensity").len() <= 64 * 64);
    assert!(!table(&csv, "schmidt").is_empty());
}

#[test]
fn equal_rates_give_half_bound() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "equal.toml", "[cascade]\nlifetime_x = 100.0\nlifetime_xx = 100.0\nbins = 128\n");
    let out = qdfusion(&["pair", "--config", &cfg]);
    assert!(out.status.success());
    assert!((number(&stdout(&out), "indistinguishability_bound") - 0.5).abs() < 1e-12);
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    for text in ["[cascade\nbins = 3", "[cascade]\nunknown_key = 1\n", "[experiment]\nshots = 0\n"] {
        let cfg = write(dir.path(), "bad.toml", text);
        let out = qdfusion(&["pair", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
    let out = qdfusion(&["pair", "--config", "/nonexistent/run.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qdfusion(&["fuse", "--scheme", "triple_pbs"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ideal_double_fusion_is_fully_coherent() {
    for engine in ["analytic", "grid"] {
        let out = qdfusion(&["fuse", "--engine", engine, "--bins", "128"]);
        assert!(out.status.success());
        let csv = stdout(&out);
        assert_eq!(format!("{:.3}", number(&csv, "coherence")), "1.000");
        assert!((number(&csv, "success_probability") - 0.5).abs() < 1e-12);
        assert_eq!(table(&csv, "density_matrix").len(), 256);
    }
}

fn bell_counts(shots: f64) -> String {
    let bell = PolarizationState::ghz_pure(2, 0.0).unwrap();
    let mut text = String::from("# synthetic Bell counts\nsetting_label,count\n");
    for label in STANDARD_SETTINGS {
        let p = (bell.matrix() * setting_projector(&parse_setting(label).unwrap())).trace().re;
        text += &format!("{label},{}\n", (p * shots).round() as i64);
    }
    text
}

#[test]
fn tomography_of_bell_counts() {
    let dir = tempfile::tempdir().unwrap();
    let counts = write(dir.path(), "bell.csv", &bell_counts(1e6));
    let out = qdfusion(&["tomo", &counts]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = stdout(&out);
    assert!(number(&csv, "fully_entangled_fraction") > 0.999);
    assert_eq!(number(&csv, "settings"), 16.0);
}

#[test]
fn bad_counts_exit_3_naming_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let good = bell_counts(1000.0);
    for (text, needle) in [
        (good.replacen("HV,", "HQ,", 1), "line 4"),
        (good.replacen("VV,", "VV,-", 1), "line 5"),
        (good.lines().take(10).collect::<Vec<_>>().join("\n"), "16 or 36"),
    ] {
        let counts = write(dir.path(), "bad.csv", &text);
        let out = qdfusion(&["tomo", &counts]);
        assert_eq!(out.status.code(), Some(3));
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{err}");
        assert!(out.stdout.is_empty());
    }
    let missing_r: String = STANDARD_SETTINGS.iter().filter(|s| !s.starts_with('R')).map(|s| format!("{s},10\n")).collect();
    let rest: String = ["DA", "AD", "AA", "DL"].iter().map(|s| format!("{s},10\n")).collect();
    let counts = write(dir.path(), "deficient.csv", &(missing_r + &rest));
    let out = qdfusion(&["tomo", &counts]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rank"));
    let out = qdfusion(&["tomo", "/nonexistent/counts.csv"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn ghz_compare_gives_three_rows() {
    let out = qdfusion(&["ghz", "--compare", "--engine", "analytic", "--shots", "20000", "--seed", "5"]);
    assert!(out.status.success());
    let csv = stdout(&out);
    let rows = table(&csv, "schemes");
    let names: Vec<&str> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(names, ["double_pbs", "single_pbs_x", "single_pbs_xx"]);
    assert!(number(&csv, "coherence_double_pbs") > 0.95);
    assert!(number(&csv, "coherence_single_pbs_x") < 0.85);
    assert_eq!(table(&csv, "scan").len(), 30);
}

#[test]
fn formats_carry_identical_values() {
    let args = ["ghz", "--engine", "analytic", "--shots", "5000", "--seed", "9"];
    let csv = stdout(&qdfusion(&args));
    let json_out = qdfusion(&[&args[..], &["--format", "json"]].concat());
    let doc: serde_json::Value = serde_json::from_slice(&json_out.stdout).unwrap();
    let s = summary(&csv);
    assert_eq!(s.len(), doc["summary"].as_object().unwrap().len());
    for (k, v) in &s {
        let j = &doc["summary"][k];
        match v.parse::<f64>() {
            Ok(x) => assert_eq!(x, j.as_f64().unwrap(), "{k}"),
            Err(_) => assert_eq!(v, j.as_str().unwrap(), "{k}"),
        }
    }
    let rows = table(&csv, "scan");
    let jrows = doc["tables"]["scan"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), jrows.len());
    for (r, jr) in rows.iter().zip(jrows) {
        assert_eq!(r[2].parse::<f64>().unwrap(), jr[2].as_f64().unwrap());
    }
    assert_eq!(doc["metadata"]["seed"], "9");
    assert_eq!(doc["config"]["seed"], 9);
}

#[test]
fn subcommands_are_deterministic() {
    for args in [
        &["ghz", "--engine", "analytic", "--shots", "3000", "--seed", "4"][..],
        &["hom", "--bins", "128", "--shots", "5000", "--seed", "4"][..],
    ] {
        assert_eq!(qdfusion(args).stdout, qdfusion(args).stdout);
    }
}

#[test]
fn loop_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "loop.toml", "[multiplex]\nn_photons = 4\nloop_loss = 0.5\n");
    let out = qdfusion(&["loop", "--config", &cfg, "--n-photons", "6"]);
    assert!(out.status.success());
    let csv = stdout(&out);
    assert_eq!(number(&csv, "n_photons"), 6.0);
    let expected = 0.25 * 0.5f64.powi(4);
    assert!((number(&csv, "success_probability") - expected).abs() < 1e-12);
    assert_eq!(table(&csv, "schedule").len(), 3);
    let out = qdfusion(&["loop", "--n-photons", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = qdfusion(&["loop", "--format", "json", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["command"], "loop");
}

#[test]
fn hom_calibration_hits_targets() {
    let out = qdfusion(&["hom", "--calibrate", "--bins", "512", "--shots", "100000"]);
    assert!(out.status.success());
    let csv = stdout(&out);
    assert!((number(&csv, "visibility_x") - 0.625).abs() < 1e-6);
    assert!((number(&csv, "visibility_xx") - 0.694).abs() < 1e-6);
    assert!((number(&csv, "simulated_visibility_x") - 0.625).abs() < 5.0 * number(&csv, "simulated_visibility_x_err"));
}

#[test]
fn reproduce_formats_agree() {
    let args = ["reproduce", "--bins", "256", "--engine", "analytic", "--shots", "20000", "--seed", "42"];
    let csv_out = qdfusion(&args);
    let json_out = qdfusion(&[&args[..], &["--format", "json"]].concat());
    assert_eq!(csv_out.status.code(), json_out.status.code());
    let csv = stdout(&csv_out);
    let doc: serde_json::Value = serde_json::from_slice(&json_out.stdout).unwrap();
    let rows = table(&csv, "criteria");
    let jrows = doc["tables"]["criteria"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), jrows.len());
    for (r, jr) in rows.iter().zip(jrows) {
        assert_eq!(r[1], jr[1].as_str().unwrap());
        assert_eq!(r[5], jr[5].as_str().unwrap());
        if let Some(x) = jr[2].as_f64() {
            assert_eq!(r[2].parse::<f64>().unwrap(), x, "{}", r[1]);
        }
    }
    let quantities: Vec<&str> = rows.iter().map(|r| r[1]).collect();
    for q in ["indistinguishability_bound", "coherence_ordering", "fidelity_double_pbs"] {
        assert!(quantities.contains(&q), "{q}");
    }
    let failed = number(&csv, "failed");
    assert_eq!(csv_out.status.code(), Some(if failed == 0.0 { 0 } else { 4 }));
}
